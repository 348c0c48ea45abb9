#include "inrv/volume.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>

namespace inrv {

namespace {

using nlohmann::json;

bool supported_bit_depth(int b) { return b == 8 || b == 12 || b == 16; }

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto n = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (!in) throw io_error("short read on " + path);
  return bytes;
}

void write_file(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw io_error("short write on " + path);
}

}  // namespace

void Volume::validate() const {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw dim_error("volume: dims must be positive");
  if (!supported_bit_depth(bit_depth)) throw format_error("volume: unsupported bit depth");
  if (static_cast<std::int64_t>(data.size()) != voxel_count()) {
    throw dim_error("volume: data length does not match dims");
  }
  for (float v : data) {
    if (!(v >= 0.0f && v <= 1.0f)) throw numeric_error("volume: value outside [0,1]");
  }
}

Volume make_volume(std::array<std::int64_t, 3> dims, int bit_depth,
                   std::array<double, 3> spacing_mm) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw dim_error("volume: dims must be positive");
  if (!supported_bit_depth(bit_depth)) throw format_error("volume: unsupported bit depth");
  Volume v;
  v.dims = dims;
  v.bit_depth = bit_depth;
  v.spacing_mm = spacing_mm;
  v.data.assign(static_cast<std::size_t>(v.voxel_count()), 0.0f);
  return v;
}

std::string sidecar_path_for(const std::string& raw_path) {
  const auto dot = raw_path.find_last_of('.');
  const auto slash = raw_path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return raw_path + ".json";
  }
  return raw_path.substr(0, dot) + ".json";
}

std::int64_t quantize_unit(double value, int bit_depth) {
  const auto maxv = static_cast<double>((std::int64_t(1) << bit_depth) - 1);
  double t = value * maxv;
  if (t <= 0.0) return 0;
  if (t >= maxv) return static_cast<std::int64_t>(maxv);
  const double f = std::floor(t);
  const double r = t - f;
  auto base = static_cast<std::int64_t>(f);
  if (r > 0.5) return base + 1;
  if (r < 0.5) return base;
  return (base % 2 == 0) ? base : base + 1;  // ties to even
}

Volume load_raw(const std::string& path, const std::string& header_path) {
  json hdr;
  {
    std::ifstream in(header_path);
    if (!in) throw io_error("cannot open sidecar " + header_path);
    try {
      in >> hdr;
    } catch (const json::exception& e) {
      throw format_error("sidecar " + header_path + ": " + e.what());
    }
  }
  if (!hdr.contains("dims") || !hdr.contains("bit_depth")) {
    throw format_error("sidecar " + header_path + ": missing dims or bit_depth");
  }
  const auto dims_j = hdr.at("dims");
  if (!dims_j.is_array() || dims_j.size() != 3) throw format_error("sidecar: dims must be [d,h,w]");
  std::array<std::int64_t, 3> dims{dims_j[0].get<std::int64_t>(), dims_j[1].get<std::int64_t>(),
                                   dims_j[2].get<std::int64_t>()};
  const int bit_depth = hdr.at("bit_depth").get<int>();
  if (!supported_bit_depth(bit_depth)) throw format_error("sidecar: unsupported bit depth");
  if (hdr.value("endianness", std::string("little")) != "little") {
    throw format_error("sidecar: only little-endian payloads are supported");
  }
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  if (hdr.contains("spacing_mm")) {
    const auto& s = hdr.at("spacing_mm");
    if (!s.is_array() || s.size() != 3) throw format_error("sidecar: spacing_mm must be [sz,sy,sx]");
    spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
  }

  Volume v = make_volume(dims, bit_depth, spacing);
  const auto bytes = read_file(path);
  const std::int64_t n = v.voxel_count();
  const std::size_t bytes_per_voxel = bit_depth == 8 ? 1 : 2;
  if (bytes.size() != static_cast<std::size_t>(n) * bytes_per_voxel) {
    throw format_error(path + ": payload size " + std::to_string(bytes.size()) +
                       " does not match header (" + std::to_string(n * static_cast<std::int64_t>(bytes_per_voxel)) +
                       " bytes expected)");
  }
  const auto maxv = static_cast<float>((std::int64_t(1) << bit_depth) - 1);
  if (bit_depth == 8) {
    for (std::int64_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(bytes[i]) / maxv;
  } else {
    const std::int64_t mask = (std::int64_t(1) << bit_depth) - 1;
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t raw =
          (static_cast<std::int64_t>(bytes[2 * i + 1]) << 8) | bytes[2 * i];  // little-endian
      v.data[i] = static_cast<float>(raw & mask) / maxv;
    }
  }
  return v;
}

Volume load_raw(const std::string& path) { return load_raw(path, sidecar_path_for(path)); }

void save_raw(const Volume& volume, const std::string& path) {
  volume.validate();
  const std::int64_t n = volume.voxel_count();
  std::vector<std::uint8_t> bytes;
  if (volume.bit_depth == 8) {
    bytes.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      bytes[i] = static_cast<std::uint8_t>(quantize_unit(volume.data[i], 8));
    }
  } else {
    bytes.resize(static_cast<std::size_t>(2 * n));
    for (std::int64_t i = 0; i < n; ++i) {
      const auto q = static_cast<std::uint16_t>(quantize_unit(volume.data[i], volume.bit_depth));
      bytes[2 * i] = static_cast<std::uint8_t>(q & 0xff);
      bytes[2 * i + 1] = static_cast<std::uint8_t>(q >> 8);
    }
  }
  write_file(path, bytes.data(), bytes.size());

  json hdr;
  hdr["dims"] = {volume.dims[0], volume.dims[1], volume.dims[2]};
  hdr["bit_depth"] = volume.bit_depth;
  hdr["spacing_mm"] = {volume.spacing_mm[0], volume.spacing_mm[1], volume.spacing_mm[2]};
  hdr["endianness"] = "little";
  const std::string text = hdr.dump(2) + "\n";
  write_file(sidecar_path_for(path), text.data(), text.size());
}

namespace {

// Reads one PGM header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (tok.empty()) throw format_error("pgm: truncated header");
  return tok;
}

}  // namespace

Volume load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  if (pgm_token(in) != "P5") throw format_error(path + ": not a binary PGM (P5)");
  std::int64_t w, h, maxval;
  try {
    w = std::stoll(pgm_token(in));
    h = std::stoll(pgm_token(in));
    maxval = std::stoll(pgm_token(in));
  } catch (const std::exception&) {
    throw format_error(path + ": malformed PGM header");
  }
  if (w < 1 || h < 1) throw format_error(path + ": bad PGM dimensions");
  if (maxval != 255 && maxval != 65535) throw format_error(path + ": unsupported maxval");

  Volume v = make_volume({1, h, w}, maxval == 255 ? 8 : 16);
  const std::int64_t n = w * h;
  if (maxval == 255) {
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) throw format_error(path + ": truncated PGM payload");
    for (std::int64_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(buf[i]) / 255.0f;
  } else {
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(2 * n));
    in.read(reinterpret_cast<char*>(buf.data()), 2 * n);
    if (!in) throw format_error(path + ": truncated PGM payload");
    for (std::int64_t i = 0; i < n; ++i) {
      // PGM 16-bit samples are most-significant-byte first
      const int raw = (buf[2 * i] << 8) | buf[2 * i + 1];
      v.data[i] = static_cast<float>(raw) / 65535.0f;
    }
  }
  return v;
}

void save_pgm(const Volume& volume, std::int64_t slice_index, const std::string& path) {
  if (slice_index < 0 || slice_index >= volume.depth()) throw dim_error("save_pgm: slice out of range");
  const std::int64_t h = volume.height(), w = volume.width();
  const bool wide = volume.bit_depth > 8;
  std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
                       (wide ? "65535" : "255") + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const float* slice = volume.data.data() + slice_index * h * w;
  if (!wide) {
    for (std::int64_t i = 0; i < h * w; ++i) {
      out.push_back(static_cast<std::uint8_t>(quantize_unit(slice[i], 8)));
    }
  } else {
    for (std::int64_t i = 0; i < h * w; ++i) {
      const auto q = static_cast<std::uint16_t>(quantize_unit(slice[i], 16));
      out.push_back(static_cast<std::uint8_t>(q >> 8));
      out.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
  }
  write_file(path, out.data(), out.size());
}

CoordGrid coord_grid(std::array<std::int64_t, 3> dims) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw dim_error("coord_grid: dims must be positive");
  CoordGrid g;
  g.in_dim = dims[0] == 1 ? 2 : 3;
  g.count = dims[0] * dims[1] * dims[2];
  g.coords.resize(static_cast<std::size_t>(g.count) * g.in_dim);

  auto axis_coord = [](std::int64_t k, std::int64_t n) -> float {
    if (n == 1) return 0.0f;
    return static_cast<float>(-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1));
  };

  std::size_t p = 0;
  for (std::int64_t z = 0; z < dims[0]; ++z) {
    const float cz = axis_coord(z, dims[0]);
    for (std::int64_t y = 0; y < dims[1]; ++y) {
      const float cy = axis_coord(y, dims[1]);
      for (std::int64_t x = 0; x < dims[2]; ++x) {
        g.coords[p++] = axis_coord(x, dims[2]);
        g.coords[p++] = cy;
        if (g.in_dim == 3) g.coords[p++] = cz;
      }
    }
  }
  return g;
}

Volume extract_slice(const Volume& volume, int axis, std::int64_t index) {
  if (axis < 0 || axis > 2) throw dim_error("extract_slice: axis must be 0 (z), 1 (y) or 2 (x)");
  if (index < 0 || index >= volume.dims[axis]) throw dim_error("extract_slice: index out of range");
  std::array<std::int64_t, 3> out_dims{1, 0, 0};
  if (axis == 0) {
    out_dims = {1, volume.dims[1], volume.dims[2]};
  } else if (axis == 1) {
    out_dims = {1, volume.dims[0], volume.dims[2]};
  } else {
    out_dims = {1, volume.dims[0], volume.dims[1]};
  }
  Volume out = make_volume(out_dims, volume.bit_depth, volume.spacing_mm);
  std::size_t p = 0;
  if (axis == 0) {
    for (std::int64_t y = 0; y < volume.dims[1]; ++y)
      for (std::int64_t x = 0; x < volume.dims[2]; ++x) out.data[p++] = volume.at(index, y, x);
  } else if (axis == 1) {
    for (std::int64_t z = 0; z < volume.dims[0]; ++z)
      for (std::int64_t x = 0; x < volume.dims[2]; ++x) out.data[p++] = volume.at(z, index, x);
  } else {
    for (std::int64_t z = 0; z < volume.dims[0]; ++z)
      for (std::int64_t y = 0; y < volume.dims[1]; ++y) out.data[p++] = volume.at(z, y, index);
  }
  return out;
}

}  // namespace inrv
