#include "inrv/codec.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "inrv/resample.hpp"

namespace inrv {

namespace {

using nlohmann::json;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

json dims_to_json(const std::array<std::int64_t, 3>& d) { return json::array({d[0], d[1], d[2]}); }

std::array<std::int64_t, 3> dims_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw format_error("codec header: dims must be [d,h,w]");
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>(), j[2].get<std::int64_t>()};
}

json train_to_json(const TrainConfig& t) {
  return json{{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
              {"iterations", t.iterations},       {"seed", t.seed},
              {"beta1", t.beta1},                 {"beta2", t.beta2},
              {"epsilon", t.epsilon}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.iterations = j.value("iterations", t.iterations);
  t.seed = j.value("seed", t.seed);
  t.beta1 = j.value("beta1", t.beta1);
  t.beta2 = j.value("beta2", t.beta2);
  t.epsilon = j.value("epsilon", t.epsilon);
  return t;
}

std::int64_t declared_param_count(const CodecInfo& info) {
  if (info.model_kind == kModelKindSiren) return siren_param_count(info.siren);
  return sr_param_count(info.sr);
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  static const auto table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (auto b : bytes) c = table[(c ^ b) & 0xff] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::string payload_hash(const CodecFile& file) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto* p = reinterpret_cast<const std::uint8_t*>(file.payload.data());
  const std::size_t n = file.payload.size() * sizeof(float);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::uint8_t> encode_bytes(const CodecFile& file) {
  std::vector<std::uint8_t> out;
  const std::size_t payload_bytes = file.payload.size() * sizeof(float);
  out.reserve(21 + file.header_json.size() + payload_bytes + 4);
  const char magic[4] = {'I', 'N', 'R', 'V'};
  for (char m : magic) out.push_back(static_cast<std::uint8_t>(m));
  put_u32(out, file.version);
  out.push_back(file.model_kind);
  put_u32(out, static_cast<std::uint32_t>(file.header_json.size()));
  out.insert(out.end(), file.header_json.begin(), file.header_json.end());
  put_u64(out, payload_bytes);
  const std::size_t payload_at = out.size();
  out.resize(out.size() + payload_bytes);
  std::memcpy(out.data() + payload_at, file.payload.data(), payload_bytes);
  put_u32(out, crc32({out.data() + payload_at, payload_bytes}));
  return out;
}

CodecFile decode_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 21) throw format_error("codec: truncated container");
  if (std::memcmp(bytes.data(), "INRV", 4) != 0) throw format_error("codec: bad magic");
  CodecFile file;
  file.version = get_u32(bytes, 4);
  if (file.version != kCodecVersion) {
    throw format_error("codec: unsupported version " + std::to_string(file.version));
  }
  file.model_kind = bytes[8];
  if (file.model_kind != kModelKindSiren && file.model_kind != kModelKindSrDense) {
    throw format_error("codec: unknown model kind " + std::to_string(file.model_kind));
  }
  const std::uint32_t header_len = get_u32(bytes, 9);
  std::size_t at = 13;
  if (bytes.size() < at + header_len + 8 + 4) throw format_error("codec: truncated header");
  file.header_json.assign(reinterpret_cast<const char*>(bytes.data() + at), header_len);
  at += header_len;
  const std::uint64_t payload_bytes = get_u64(bytes, at);
  at += 8;
  if (payload_bytes % sizeof(float) != 0) throw format_error("codec: payload not binary32-aligned");
  if (bytes.size() != at + payload_bytes + 4) throw format_error("codec: container size mismatch");
  const std::uint32_t stored_crc = get_u32(bytes, at + payload_bytes);
  const std::uint32_t actual_crc = crc32(bytes.subspan(at, payload_bytes));
  if (stored_crc != actual_crc) throw format_error("codec: payload crc mismatch");
  file.payload.resize(payload_bytes / sizeof(float));
  std::memcpy(file.payload.data(), bytes.data() + at, payload_bytes);

  // header must parse and agree with the payload
  const CodecInfo info = parse_header(file);
  if (info.param_count != static_cast<std::int64_t>(file.payload.size())) {
    throw format_error("codec: declared param count disagrees with payload length");
  }
  if (declared_param_count(info) != info.param_count) {
    throw format_error("codec: architecture/payload inconsistency");
  }
  return file;
}

void write_codec_file(const CodecFile& file, const std::string& path) {
  const auto bytes = encode_bytes(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write on " + path);
}

CodecFile read_codec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto n = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (!in) throw io_error("short read on " + path);
  return decode_bytes(bytes);
}

CodecInfo parse_header(const CodecFile& file) {
  json h;
  try {
    h = json::parse(file.header_json);
  } catch (const json::exception& e) {
    throw format_error(std::string("codec header: ") + e.what());
  }
  CodecInfo info;
  info.model_kind = file.model_kind;
  try {
    info.param_count = h.at("param_count").get<std::int64_t>();
    info.bit_depth = h.at("normalization").at("bit_depth").get<int>();
    const auto& arch = h.at("arch");
    if (file.model_kind == kModelKindSiren) {
      info.siren.in_dim = arch.at("in_dim").get<int>();
      info.siren.hidden_width = arch.at("hidden_width").get<int>();
      info.siren.hidden_layers = arch.at("hidden_layers").get<int>();
      info.siren.omega0 = arch.at("omega0").get<double>();
      info.siren.omega_hidden = arch.at("omega_hidden").get<double>();
      info.siren.seed = arch.at("seed").get<std::uint64_t>();
      const auto& geom = h.at("geometry");
      info.lr_dims = dims_from_json(geom.at("lr_dims"));
      info.hr_dims = dims_from_json(geom.at("hr_dims"));
      info.lanczos_a = geom.at("lanczos_a").get<int>();
      const auto& sp = h.at("spacing_mm");
      info.spacing_mm = {sp[0].get<double>(), sp[1].get<double>(), sp[2].get<double>()};
      info.sr_model_hash = h.value("sr_model_hash", std::string());
      if (h.contains("train")) info.train = train_from_json(h.at("train"));
    } else {
      info.sr.blocks = arch.at("blocks").get<int>();
      info.sr.layers_per_block = arch.at("layers_per_block").get<int>();
      info.sr.growth = arch.at("growth").get<int>();
      info.sr.low_level_channels = arch.at("low_level_channels").get<int>();
      info.sr.bottleneck_channels = arch.at("bottleneck_channels").get<int>();
      info.sr.scale = arch.at("scale").get<int>();
      info.sr.seed = arch.at("seed").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw format_error(std::string("codec header: ") + e.what());
  }
  return info;
}

CodecFile make_siren_codec(const SirenModel& model, std::array<std::int64_t, 3> lr_dims,
                           std::array<std::int64_t, 3> hr_dims, int lanczos_a, int bit_depth,
                           std::array<double, 3> spacing_mm, const TrainConfig& train,
                           const std::string& sr_model_hash) {
  CodecFile file;
  file.model_kind = kModelKindSiren;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    file.payload.insert(file.payload.end(), model.weights[l].begin(), model.weights[l].end());
    file.payload.insert(file.payload.end(), model.biases[l].begin(), model.biases[l].end());
  }
  json h;
  h["arch"] = {{"in_dim", model.config.in_dim},
               {"hidden_width", model.config.hidden_width},
               {"hidden_layers", model.config.hidden_layers},
               {"omega0", model.config.omega0},
               {"omega_hidden", model.config.omega_hidden},
               {"seed", model.config.seed}};
  h["geometry"] = {{"lr_dims", dims_to_json(lr_dims)},
                   {"hr_dims", dims_to_json(hr_dims)},
                   {"lanczos_a", lanczos_a}};
  h["normalization"] = {{"bit_depth", bit_depth}, {"intensity_scale", 255.0}};
  h["spacing_mm"] = {spacing_mm[0], spacing_mm[1], spacing_mm[2]};
  h["param_count"] = static_cast<std::int64_t>(file.payload.size());
  h["train"] = train_to_json(train);
  if (!sr_model_hash.empty()) h["sr_model_hash"] = sr_model_hash;
  file.header_json = h.dump();
  return file;
}

CodecFile make_sr_codec(const SrModel& model, int bit_depth) {
  CodecFile file;
  file.model_kind = kModelKindSrDense;
  for (std::size_t l = 0; l < model.kernels.size(); ++l) {
    file.payload.insert(file.payload.end(), model.kernels[l].begin(), model.kernels[l].end());
    file.payload.insert(file.payload.end(), model.biases[l].begin(), model.biases[l].end());
  }
  json h;
  h["arch"] = {{"blocks", model.config.blocks},
               {"layers_per_block", model.config.layers_per_block},
               {"growth", model.config.growth},
               {"low_level_channels", model.config.low_level_channels},
               {"bottleneck_channels", model.config.bottleneck_channels},
               {"scale", model.config.scale},
               {"seed", model.config.seed}};
  h["normalization"] = {{"bit_depth", bit_depth}, {"intensity_scale", 255.0}};
  h["param_count"] = static_cast<std::int64_t>(file.payload.size());
  file.header_json = h.dump();
  return file;
}

SirenModel codec_to_siren(const CodecFile& file) {
  if (file.model_kind != kModelKindSiren) throw format_error("codec: not a siren container");
  const CodecInfo info = parse_header(file);
  SirenModel model;
  model.config = info.siren;
  std::size_t at = 0;
  std::int64_t fan_in = info.siren.in_dim;
  for (int l = 0; l <= info.siren.hidden_layers; ++l) {
    const std::int64_t fan_out = l == info.siren.hidden_layers ? 1 : info.siren.hidden_width;
    model.weights.emplace_back(file.payload.begin() + at, file.payload.begin() + at + fan_in * fan_out);
    at += static_cast<std::size_t>(fan_in * fan_out);
    model.biases.emplace_back(file.payload.begin() + at, file.payload.begin() + at + fan_out);
    at += static_cast<std::size_t>(fan_out);
    fan_in = fan_out;
  }
  return model;
}

SrModel codec_to_sr(const CodecFile& file) {
  if (file.model_kind != kModelKindSrDense) throw format_error("codec: not an SR container");
  const CodecInfo info = parse_header(file);
  SrModel model;
  model.config = info.sr;
  std::size_t at = 0;
  for (const auto& s : sr_layer_shapes(info.sr)) {
    const std::int64_t kn = s.kernel[0] * s.kernel[1] * s.kernel[2] * s.kernel[3];
    model.kernels.emplace_back(file.payload.begin() + at, file.payload.begin() + at + kn);
    at += static_cast<std::size_t>(kn);
    model.biases.emplace_back(file.payload.begin() + at, file.payload.begin() + at + s.bias);
    at += static_cast<std::size_t>(s.bias);
  }
  return model;
}

CodecFile compress(const Volume& volume_hr, std::array<std::int64_t, 3> lr_dims,
                   const SirenConfig& siren_config, const TrainConfig& train_config, int lanczos_a,
                   TrainLog* out_log) {
  for (int axis = 0; axis < 3; ++axis) {
    if (lr_dims[axis] > volume_hr.dims[axis] || lr_dims[axis] < 1) {
      throw dim_error("compress: lr dims must be positive and no larger than the volume");
    }
  }
  const Volume lr =
      lr_dims == volume_hr.dims ? volume_hr : downsample(volume_hr, lr_dims, lanczos_a);

  SirenConfig cfg = siren_config;
  cfg.in_dim = lr.is_2d() ? 2 : 3;
  TrainResult result = train_siren(lr, cfg, train_config);
  if (out_log != nullptr) *out_log = result.log;
  return make_siren_codec(result.model, lr_dims, volume_hr.dims, lanczos_a, volume_hr.bit_depth,
                          volume_hr.spacing_mm, train_config);
}

DecodeResult decompress(const CodecFile& file, const SrModel* sr_model) {
  if (file.model_kind != kModelKindSiren) throw format_error("decompress: not a siren container");
  const CodecInfo info = parse_header(file);
  const SirenModel model = codec_to_siren(file);

  std::array<double, 3> lr_spacing = info.spacing_mm;
  for (int axis = 0; axis < 3; ++axis) {
    if (info.lr_dims[axis] != info.hr_dims[axis]) {
      lr_spacing[axis] = info.spacing_mm[axis] * static_cast<double>(info.hr_dims[axis]) /
                         static_cast<double>(info.lr_dims[axis]);
    }
  }
  Volume lr = render_to_volume(model, info.lr_dims, info.bit_depth, lr_spacing);
  if (info.lr_dims == info.hr_dims) return {std::move(lr), false};

  if (sr_model == nullptr) {
    return {upsample(lr, info.hr_dims, info.lanczos_a), true};
  }

  const int scale = sr_model->config.scale;
  if (info.hr_dims[1] != info.lr_dims[1] * scale || info.hr_dims[2] != info.lr_dims[2] * scale) {
    throw dim_error("decompress: SR scale does not match the container geometry");
  }
  Volume hr = make_volume({info.lr_dims[0], info.hr_dims[1], info.hr_dims[2]}, info.bit_depth,
                          {lr_spacing[0], info.spacing_mm[1], info.spacing_mm[2]});
  for (std::int64_t z = 0; z < lr.depth(); ++z) {
    const Volume slice_hr = sr_forward(*sr_model, extract_slice(lr, 0, z));
    std::copy(slice_hr.data.begin(), slice_hr.data.end(),
              hr.data.begin() + z * hr.height() * hr.width());
  }
  if (info.hr_dims[0] != info.lr_dims[0]) {
    hr = upsample(hr, info.hr_dims, info.lanczos_a);
  }
  return {std::move(hr), false};
}

double compression_rate(const Volume& original, const CodecFile& file, bool count_sr,
                        const CodecFile* sr_file) {
  double denom = static_cast<double>(file.payload.size() * sizeof(float));
  if (count_sr) {
    if (sr_file == nullptr) throw dim_error("compression_rate: count_sr requires the SR container");
    denom += static_cast<double>(sr_file->payload.size() * sizeof(float));
  }
  return static_cast<double>(original.voxel_count()) / denom;
}

bool roundtrip_check(std::span<const std::uint8_t> bytes, std::string* diagnostic) {
  try {
    const CodecFile file = decode_bytes(bytes);
    const auto encoded = encode_bytes(file);
    if (encoded.size() != bytes.size() ||
        !std::equal(encoded.begin(), encoded.end(), bytes.begin())) {
      if (diagnostic != nullptr) *diagnostic = "re-encoded bytes differ from input";
      return false;
    }
    return true;
  } catch (const std::exception& e) {
    if (diagnostic != nullptr) *diagnostic = e.what();
    return false;
  }
}

bool roundtrip_check(const std::string& path, std::string* diagnostic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (diagnostic != nullptr) *diagnostic = "cannot open " + path;
    return false;
  }
  in.seekg(0, std::ios::end);
  const auto n = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  return roundtrip_check(bytes, diagnostic);
}

}  // namespace inrv
