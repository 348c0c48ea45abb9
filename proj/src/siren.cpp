#include "inrv/siren.hpp"

#include <cmath>

#include "inrv/rng.hpp"

namespace inrv {

namespace {

void check_config(const SirenConfig& c) {
  if (c.in_dim != 2 && c.in_dim != 3) throw dim_error("siren: in_dim must be 2 or 3");
  if (c.hidden_width < 1) throw dim_error("siren: hidden_width must be >= 1");
  if (c.hidden_layers < 1) throw dim_error("siren: hidden_layers must be >= 1");
  if (!(c.omega0 > 0.0) || !(c.omega_hidden > 0.0)) throw numeric_error("siren: omega must be positive");
}

}  // namespace

std::int64_t siren_param_count(const SirenConfig& config) {
  check_config(config);
  std::int64_t total = 0;
  std::int64_t fan_in = config.in_dim;
  for (int l = 0; l < config.hidden_layers; ++l) {
    total += (fan_in + 1) * config.hidden_width;
    fan_in = config.hidden_width;
  }
  total += (fan_in + 1) * 1;
  return total;
}

SirenModel siren_init(const SirenConfig& config) {
  check_config(config);
  Rng rng(config.seed);
  SirenModel model;
  model.config = config;

  std::int64_t fan_in = config.in_dim;
  const int layer_count = config.hidden_layers + 1;
  for (int l = 0; l < layer_count; ++l) {
    const std::int64_t fan_out = l == config.hidden_layers ? 1 : config.hidden_width;
    double bound;
    if (l == 0) {
      bound = 1.0 / static_cast<double>(fan_in);
    } else {
      bound = std::sqrt(6.0 / static_cast<double>(fan_in)) / config.omega_hidden;
    }
    std::vector<float> w(static_cast<std::size_t>(fan_in * fan_out));
    for (auto& x : w) x = static_cast<float>(rng.uniform(-bound, bound));
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0f);
    fan_in = fan_out;
  }
  return model;
}

std::vector<float> siren_forward(const SirenModel& model, const CoordGrid& grid,
                                 std::int64_t chunk) {
  if (grid.in_dim != model.config.in_dim) {
    throw dim_error("siren_forward: grid dimensionality does not match model in_dim");
  }
  if (chunk < 1) chunk = grid.count;
  const auto params = SirenParams<float>::from_model(model, false);
  std::vector<float> out(static_cast<std::size_t>(grid.count));
  for (std::int64_t start = 0; start < grid.count; start += chunk) {
    const std::int64_t n = std::min(chunk, grid.count - start);
    std::span<const float> block(grid.coords.data() + start * grid.in_dim,
                                 static_cast<std::size_t>(n * grid.in_dim));
    auto coords = Tensor<float>::from_data({n, grid.in_dim}, block, false);
    auto y = siren_apply(params, coords);
    std::copy(y.values().begin(), y.values().end(), out.begin() + start);
  }
  return out;
}

}  // namespace inrv
