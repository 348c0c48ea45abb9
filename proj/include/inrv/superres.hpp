#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "inrv/conv.hpp"
#include "inrv/tensor.hpp"
#include "inrv/trainer.hpp"
#include "inrv/volume.hpp"

namespace inrv {

// Dense-skip super-resolution CNN: low-level 3x3 conv, `blocks` dense blocks
// (each layer sees the concat of the block input and all previous layer
// outputs), concat of the low-level output and every block output into a 1x1
// bottleneck, log2(scale) stride-2 deconvolutions, 3x3 reconstruction.
struct SrConfig {
  int blocks = 8;
  int layers_per_block = 8;
  int growth = 16;
  int low_level_channels = 128;
  int bottleneck_channels = 256;
  int scale = 4;  // power of 2
  std::uint64_t seed = 0;
};

struct SrLayerShape {
  std::array<std::int64_t, 4> kernel;
  std::int64_t bias;
};

// Deterministic layer enumeration; also fixes the serialization order.
std::vector<SrLayerShape> sr_layer_shapes(const SrConfig& config);
std::int64_t sr_param_count(const SrConfig& config);

struct SrModel {
  SrConfig config;
  std::vector<std::vector<float>> kernels;  // per layer, row-major
  std::vector<std::vector<float>> biases;
};

// He-style uniform init (bound sqrt(6/fan_in)), biases zero.
SrModel sr_init(const SrConfig& config);

template <class T>
struct SrParams {
  SrConfig config;
  std::vector<Tensor<T>> kernels;
  std::vector<Tensor<T>> biases;

  static SrParams from_model(const SrModel& model, bool requires_grad) {
    SrParams p;
    p.config = model.config;
    const auto shapes = sr_layer_shapes(model.config);
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      std::vector<T> k(model.kernels[l].begin(), model.kernels[l].end());
      std::vector<T> b(model.biases[l].begin(), model.biases[l].end());
      const auto& s = shapes[l].kernel;
      p.kernels.push_back(Tensor<T>::from_data({s[0], s[1], s[2], s[3]}, k, requires_grad));
      p.biases.push_back(Tensor<T>::from_data({shapes[l].bias}, b, requires_grad));
    }
    return p;
  }

  SrModel to_model() const {
    SrModel m;
    m.config = config;
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      m.kernels.emplace_back(kernels[l].values().begin(), kernels[l].values().end());
      m.biases.emplace_back(biases[l].values().begin(), biases[l].values().end());
    }
    return m;
  }

  std::vector<Tensor<T>> all() const {
    std::vector<Tensor<T>> out;
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      out.push_back(kernels[l]);
      out.push_back(biases[l]);
    }
    return out;
  }
};

// Forward graph on a [1 x h x w] tensor; raw (unclamped) [1 x scale*h x scale*w].
template <class T>
Tensor<T> sr_apply(const SrParams<T>& params, const Tensor<T>& lr_image);

// Inference on a 2-D volume slice; output clamped to [0,1].
Volume sr_forward(const SrModel& model, const Volume& lr_image);

// Adam on MSE over (LR, HR) patch pairs; a deterministic tail fraction of the
// pairs is held out for validation and the best-validation model is returned.
SrModel sr_train(const std::vector<std::pair<Volume, Volume>>& pairs, const SrConfig& config,
                 const TrainConfig& train_config);

extern template Tensor<float> sr_apply<float>(const SrParams<float>&, const Tensor<float>&);
extern template Tensor<double> sr_apply<double>(const SrParams<double>&, const Tensor<double>&);

}  // namespace inrv
