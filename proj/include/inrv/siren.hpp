#pragma once

#include <cstdint>
#include <vector>

#include "inrv/tensor.hpp"
#include "inrv/volume.hpp"

namespace inrv {

struct SirenConfig {
  int in_dim = 3;
  int hidden_width = 128;
  int hidden_layers = 2;  // hidden linear layers; one more linear maps to the scalar output
  double omega0 = 30.0;
  double omega_hidden = 30.0;
  std::uint64_t seed = 0;
};

// Weights of the coordinate MLP; this is the compressed representation.
// Weight matrices are stored row-major as [fan_in x fan_out].
struct SirenModel {
  SirenConfig config;
  std::vector<std::vector<float>> weights;
  std::vector<std::vector<float>> biases;
};

std::int64_t siren_param_count(const SirenConfig& config);

// First layer ~ U(-1/in_dim, 1/in_dim), subsequent layers
// ~ U(-sqrt(6/fan_in)/omega_hidden, +sqrt(6/fan_in)/omega_hidden), biases zero.
SirenModel siren_init(const SirenConfig& config);

// Trainable parameter tensors mirroring a SirenModel, plus the forward graph.
template <class T>
struct SirenParams {
  SirenConfig config;
  std::vector<Tensor<T>> weights;
  std::vector<Tensor<T>> biases;

  static SirenParams from_model(const SirenModel& model, bool requires_grad) {
    SirenParams p;
    p.config = model.config;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      const auto fan_out = static_cast<std::int64_t>(model.biases[l].size());
      const auto fan_in = static_cast<std::int64_t>(model.weights[l].size()) / fan_out;
      std::vector<T> w(model.weights[l].begin(), model.weights[l].end());
      std::vector<T> b(model.biases[l].begin(), model.biases[l].end());
      p.weights.push_back(Tensor<T>::from_data({fan_in, fan_out}, w, requires_grad));
      p.biases.push_back(Tensor<T>::from_data({fan_out}, b, requires_grad));
    }
    return p;
  }

  SirenModel to_model() const {
    SirenModel m;
    m.config = config;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      m.weights.emplace_back(weights[l].values().begin(), weights[l].values().end());
      m.biases.emplace_back(biases[l].values().begin(), biases[l].values().end());
    }
    return m;
  }

  std::vector<Tensor<T>> all() const {
    std::vector<Tensor<T>> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.push_back(weights[l]);
      out.push_back(biases[l]);
    }
    return out;
  }
};

// sigma = W_L ( ... sin(omega_h * W_2 sin(omega_0 * W_1 x + b_1) + b_2) ... ) + b_L
// Output layer is linear; callers clamp to [0,1] only at decode time.
template <class T>
Tensor<T> siren_apply(const SirenParams<T>& params, const Tensor<T>& coords) {
  if (coords.shape().size() != 2 || coords.shape()[1] != params.config.in_dim) {
    throw dim_error("siren_apply: coords must be [N x in_dim]");
  }
  const std::size_t layer_count = params.weights.size();
  Tensor<T> h = coords;
  for (std::size_t l = 0; l + 1 < layer_count; ++l) {
    const T omega = static_cast<T>(l == 0 ? params.config.omega0 : params.config.omega_hidden);
    h = sine(add_bias(scale(matmul(h, params.weights[l]), omega), params.biases[l]), T(1));
  }
  return add_bias(matmul(h, params.weights[layer_count - 1]), params.biases[layer_count - 1]);
}

// Forward on a coordinate grid in inference mode (no graph kept), chunked.
// Raw (unclamped) outputs, one per grid point.
std::vector<float> siren_forward(const SirenModel& model, const CoordGrid& grid,
                                 std::int64_t chunk = 65536);

}  // namespace inrv
