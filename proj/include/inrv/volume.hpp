#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "inrv/errors.hpp"

namespace inrv {

// Dense scalar grid, intensities normalized to [0,1]. dims are (depth, height,
// width) with depth == 1 for 2-D slices; data is z-major, x fastest.
struct Volume {
  std::array<std::int64_t, 3> dims{1, 0, 0};
  int bit_depth = 8;  // 8, 12 or 16 bits per voxel
  std::array<double, 3> spacing_mm{1.0, 1.0, 1.0};
  std::vector<float> data;

  std::int64_t depth() const { return dims[0]; }
  std::int64_t height() const { return dims[1]; }
  std::int64_t width() const { return dims[2]; }
  std::int64_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  bool is_2d() const { return dims[0] == 1; }

  float& at(std::int64_t z, std::int64_t y, std::int64_t x) {
    return data[(z * dims[1] + y) * dims[2] + x];
  }
  float at(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return data[(z * dims[1] + y) * dims[2] + x];
  }

  void validate() const;
};

Volume make_volume(std::array<std::int64_t, 3> dims, int bit_depth = 8,
                   std::array<double, 3> spacing_mm = {1.0, 1.0, 1.0});

// Raw voxel payload plus a JSON sidecar declaring dims, bit_depth, spacing_mm
// and endianness. 12-bit volumes travel in 16-bit little-endian containers.
Volume load_raw(const std::string& path, const std::string& header_path);
Volume load_raw(const std::string& path);  // sidecar at <stem>.json
void save_raw(const Volume& volume, const std::string& path);

std::string sidecar_path_for(const std::string& raw_path);

// Binary PGM (P5), maxval 255 or 65535; 16-bit samples are big-endian.
Volume load_pgm(const std::string& path);
void save_pgm(const Volume& volume, std::int64_t slice_index, const std::string& path);

// One normalized coordinate per voxel, components in [-1,1]; row-major
// correspondence with Volume voxels, point layout (x,y) or (x,y,z).
struct CoordGrid {
  int in_dim = 2;
  std::int64_t count = 0;
  std::vector<float> coords;  // count * in_dim
};

CoordGrid coord_grid(std::array<std::int64_t, 3> dims);

Volume extract_slice(const Volume& volume, int axis, std::int64_t index);

// Round-half-to-even quantization used by save_raw.
std::int64_t quantize_unit(double value, int bit_depth);

}  // namespace inrv
