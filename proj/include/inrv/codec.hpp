#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inrv/siren.hpp"
#include "inrv/superres.hpp"
#include "inrv/trainer.hpp"
#include "inrv/volume.hpp"

namespace inrv {

inline constexpr std::uint32_t kCodecVersion = 1;
inline constexpr std::uint8_t kModelKindSiren = 1;
inline constexpr std::uint8_t kModelKindSrDense = 2;

// Serialized container: magic "INRV" | version u32 | model_kind u8 |
// header_len u32 | header (UTF-8 JSON) | payload_len u64 | payload (IEEE-754
// binary32, little-endian, layer order, row-major) | crc32 u32.
struct CodecFile {
  std::uint32_t version = kCodecVersion;
  std::uint8_t model_kind = kModelKindSiren;
  std::string header_json;  // canonical form, preserved verbatim
  std::vector<float> payload;
};

// Parsed header fields shared by tooling.
struct CodecInfo {
  std::uint8_t model_kind = 0;
  std::int64_t param_count = 0;
  SirenConfig siren;  // valid when model_kind == siren
  SrConfig sr;        // valid when model_kind == srdense
  std::array<std::int64_t, 3> lr_dims{1, 0, 0};
  std::array<std::int64_t, 3> hr_dims{1, 0, 0};
  int lanczos_a = 3;
  int bit_depth = 8;
  std::array<double, 3> spacing_mm{1.0, 1.0, 1.0};
  std::string sr_model_hash;  // empty when absent
  TrainConfig train;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// FNV-1a over the payload bytes, 16 hex digits; identifies a shared SR model.
std::string payload_hash(const CodecFile& file);

std::vector<std::uint8_t> encode_bytes(const CodecFile& file);
CodecFile decode_bytes(std::span<const std::uint8_t> bytes);

void write_codec_file(const CodecFile& file, const std::string& path);
CodecFile read_codec_file(const std::string& path);

CodecInfo parse_header(const CodecFile& file);

CodecFile make_siren_codec(const SirenModel& model, std::array<std::int64_t, 3> lr_dims,
                           std::array<std::int64_t, 3> hr_dims, int lanczos_a, int bit_depth,
                           std::array<double, 3> spacing_mm, const TrainConfig& train,
                           const std::string& sr_model_hash = "");
CodecFile make_sr_codec(const SrModel& model, int bit_depth);

SirenModel codec_to_siren(const CodecFile& file);
SrModel codec_to_sr(const CodecFile& file);

// Downsample to lr_dims (identity when equal), fit a SIREN on the LR volume,
// serialize the best checkpoint with the grid geometry.
CodecFile compress(const Volume& volume_hr, std::array<std::int64_t, 3> lr_dims,
                   const SirenConfig& siren_config, const TrainConfig& train_config,
                   int lanczos_a = 3, TrainLog* out_log = nullptr);

struct DecodeResult {
  Volume volume;
  bool lanczos_fallback = false;  // HR dims differed and no SR model was supplied
};

// SIREN on the LR grid, clamp to [0,1], then SR (per z-slice) or Lanczos back
// to HR dims.
DecodeResult decompress(const CodecFile& file, const SrModel* sr_model = nullptr);

// (voxels x 1 byte) / payload bytes, optionally charging the SR payload too.
double compression_rate(const Volume& original, const CodecFile& file, bool count_sr = false,
                        const CodecFile* sr_file = nullptr);

// True when decode(bytes) re-encodes to the identical byte string.
bool roundtrip_check(std::span<const std::uint8_t> bytes, std::string* diagnostic = nullptr);
bool roundtrip_check(const std::string& path, std::string* diagnostic = nullptr);

}  // namespace inrv
