#include "inrv/superres.hpp"

#include <algorithm>
#include <cmath>

#include "inrv/adam.hpp"
#include "inrv/rng.hpp"

namespace inrv {

namespace {

void check_config(const SrConfig& c) {
  if (c.blocks < 1 || c.layers_per_block < 1 || c.growth < 1) {
    throw dim_error("sr: blocks, layers_per_block and growth must be >= 1");
  }
  if (c.low_level_channels < 1 || c.bottleneck_channels < 1) {
    throw dim_error("sr: channel counts must be >= 1");
  }
  if (c.scale < 1 || (c.scale & (c.scale - 1)) != 0) {
    throw dim_error("sr: scale must be a power of 2");
  }
}

int deconv_count(const SrConfig& c) {
  int n = 0;
  for (int s = c.scale; s > 1; s /= 2) ++n;
  return n;
}

}  // namespace

std::vector<SrLayerShape> sr_layer_shapes(const SrConfig& c) {
  check_config(c);
  std::vector<SrLayerShape> shapes;
  const std::int64_t block_out = static_cast<std::int64_t>(c.layers_per_block) * c.growth;

  shapes.push_back({{c.low_level_channels, 1, 3, 3}, c.low_level_channels});
  std::int64_t block_in = c.low_level_channels;
  for (int b = 0; b < c.blocks; ++b) {
    for (int j = 0; j < c.layers_per_block; ++j) {
      const std::int64_t c_in = block_in + static_cast<std::int64_t>(j) * c.growth;
      shapes.push_back({{c.growth, c_in, 3, 3}, c.growth});
    }
    block_in = block_out;
  }
  const std::int64_t skip_channels = c.low_level_channels + static_cast<std::int64_t>(c.blocks) * block_out;
  shapes.push_back({{c.bottleneck_channels, skip_channels, 1, 1}, c.bottleneck_channels});
  for (int d = 0; d < deconv_count(c); ++d) {
    // deconv kernels are [C_in x C_out x kh x kw]
    shapes.push_back({{c.bottleneck_channels, c.bottleneck_channels, 4, 4}, c.bottleneck_channels});
  }
  shapes.push_back({{1, c.bottleneck_channels, 3, 3}, 1});
  return shapes;
}

std::int64_t sr_param_count(const SrConfig& config) {
  std::int64_t total = 0;
  for (const auto& s : sr_layer_shapes(config)) {
    total += s.kernel[0] * s.kernel[1] * s.kernel[2] * s.kernel[3] + s.bias;
  }
  return total;
}

SrModel sr_init(const SrConfig& config) {
  const auto shapes = sr_layer_shapes(config);
  Rng rng(config.seed);
  SrModel model;
  model.config = config;
  for (const auto& s : shapes) {
    const std::int64_t n = s.kernel[0] * s.kernel[1] * s.kernel[2] * s.kernel[3];
    const std::int64_t fan_in = s.kernel[1] * s.kernel[2] * s.kernel[3];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::vector<float> k(static_cast<std::size_t>(n));
    for (auto& x : k) x = static_cast<float>(rng.uniform(-bound, bound));
    model.kernels.push_back(std::move(k));
    model.biases.emplace_back(static_cast<std::size_t>(s.bias), 0.0f);
  }
  return model;
}

template <class T>
Tensor<T> sr_apply(const SrParams<T>& params, const Tensor<T>& lr_image) {
  const auto& c = params.config;
  if (lr_image.shape().size() != 3 || lr_image.shape()[0] != 1) {
    throw dim_error("sr_apply: input must be [1 x h x w]");
  }
  if (lr_image.shape()[1] < 8 || lr_image.shape()[2] < 8) {
    throw dim_error("sr_apply: input sides must be >= 8");
  }
  std::size_t l = 0;
  auto conv_relu = [&](const Tensor<T>& x, std::int64_t stride, std::int64_t pad) {
    auto y = relu(add_channel_bias(conv2d(x, params.kernels[l], stride, pad), params.biases[l]));
    ++l;
    return y;
  };

  Tensor<T> low = conv_relu(lr_image, 1, 1);

  std::vector<Tensor<T>> levels{low};
  Tensor<T> block_in = low;
  for (int b = 0; b < c.blocks; ++b) {
    std::vector<Tensor<T>> cat{block_in};
    for (int j = 0; j < c.layers_per_block; ++j) {
      Tensor<T> inp = cat.size() == 1 ? cat[0] : concat_channels(cat);
      cat.push_back(conv_relu(inp, 1, 1));
    }
    std::vector<Tensor<T>> outs(cat.begin() + 1, cat.end());
    Tensor<T> block_out = outs.size() == 1 ? outs[0] : concat_channels(outs);
    levels.push_back(block_out);
    block_in = block_out;
  }

  Tensor<T> bottleneck = conv_relu(concat_channels(levels), 1, 0);

  Tensor<T> up = bottleneck;
  const int deconvs = [&] {
    int n = 0;
    for (int s = c.scale; s > 1; s /= 2) ++n;
    return n;
  }();
  for (int d = 0; d < deconvs; ++d) {
    up = relu(add_channel_bias(deconv2d(up, params.kernels[l], 2, 1), params.biases[l]));
    ++l;
  }

  auto out = add_channel_bias(conv2d(up, params.kernels[l], 1, 1), params.biases[l]);
  ++l;
  return out;
}

template Tensor<float> sr_apply<float>(const SrParams<float>&, const Tensor<float>&);
template Tensor<double> sr_apply<double>(const SrParams<double>&, const Tensor<double>&);

Volume sr_forward(const SrModel& model, const Volume& lr_image) {
  if (!lr_image.is_2d()) throw dim_error("sr_forward: input must be a 2-D slice");
  const auto params = SrParams<float>::from_model(model, false);
  auto x = Tensor<float>::from_data({1, lr_image.height(), lr_image.width()},
                                    std::span<const float>(lr_image.data), false);
  auto y = sr_apply(params, x);
  Volume out = make_volume({1, y.shape()[1], y.shape()[2]}, lr_image.bit_depth,
                           {lr_image.spacing_mm[0], lr_image.spacing_mm[1] / model.config.scale,
                            lr_image.spacing_mm[2] / model.config.scale});
  const auto vals = y.values();
  for (std::int64_t i = 0; i < y.size(); ++i) out.data[i] = std::clamp(vals[i], 0.0f, 1.0f);
  return out;
}

namespace {

double sr_validation_mse(const SrParams<float>& params,
                         const std::vector<std::pair<Volume, Volume>>& pairs,
                         std::size_t val_begin) {
  double acc = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = val_begin; i < pairs.size(); ++i) {
    auto x = Tensor<float>::from_data({1, pairs[i].first.height(), pairs[i].first.width()},
                                      std::span<const float>(pairs[i].first.data), false);
    auto y = sr_apply(params, x);
    const auto vals = y.values();
    const auto& hr = pairs[i].second.data;
    for (std::size_t v = 0; v < hr.size(); ++v) {
      const double d = static_cast<double>(vals[v]) - static_cast<double>(hr[v]);
      acc += d * d;
    }
    n += y.size();
  }
  return acc / static_cast<double>(n);
}

}  // namespace

SrModel sr_train(const std::vector<std::pair<Volume, Volume>>& pairs, const SrConfig& config,
                 const TrainConfig& train_config) {
  if (pairs.empty()) throw dim_error("sr_train: empty pair list");
  for (const auto& [lr, hr] : pairs) {
    if (!lr.is_2d() || !hr.is_2d()) throw dim_error("sr_train: pairs must be 2-D");
    if (hr.height() != lr.height() * config.scale || hr.width() != lr.width() * config.scale) {
      throw dim_error("sr_train: pair shapes inconsistent with scale");
    }
  }

  // deterministic tail holdout, at least one pair when possible
  std::size_t val_count = pairs.size() >= 10 ? pairs.size() / 10 : (pairs.size() > 1 ? 1 : 0);
  const std::size_t val_begin = pairs.size() - val_count;
  const std::size_t train_count = val_begin > 0 ? val_begin : pairs.size();

  SrModel model = sr_init(config);
  auto params = SrParams<float>::from_model(model, true);
  AdamOptimizer<float> optimizer(params.all(), static_cast<float>(train_config.learning_rate),
                                 static_cast<float>(train_config.beta1),
                                 static_cast<float>(train_config.beta2),
                                 static_cast<float>(train_config.epsilon));
  Rng rng(train_config.seed);

  const std::int64_t batch =
      std::min<std::int64_t>(std::max<std::int64_t>(train_config.batch_size, 1),
                             static_cast<std::int64_t>(train_count));
  std::vector<std::size_t> order(train_count);
  for (std::size_t i = 0; i < train_count; ++i) order[i] = i;
  std::size_t pos = 0;

  SrModel best = model;
  double best_val = sr_validation_mse(params, pairs, val_count > 0 ? val_begin : 0);

  for (std::int64_t iter = 1; iter <= train_config.iterations; ++iter) {
    optimizer.zero_grad();
    double batch_loss = 0.0;
    for (std::int64_t k = 0; k < batch; ++k) {
      if (pos == 0) rng.shuffle(order);
      const auto& [lr_patch, hr_patch] = pairs[order[pos]];
      pos = (pos + 1) % train_count;
      auto x = Tensor<float>::from_data({1, lr_patch.height(), lr_patch.width()},
                                        std::span<const float>(lr_patch.data), false);
      auto t = Tensor<float>::from_data({1, hr_patch.height(), hr_patch.width()},
                                        std::span<const float>(hr_patch.data), false);
      auto loss = scale(mse_loss(sr_apply(params, x), t), 1.0f / static_cast<float>(batch));
      backward(loss);
      batch_loss += loss.item();
    }
    optimizer.step();
    if (iter % std::max<std::int64_t>(train_config.eval_interval, 1) == 0 ||
        iter == train_config.iterations) {
      const double val = sr_validation_mse(params, pairs, val_count > 0 ? val_begin : 0);
      if (val < best_val) {
        best_val = val;
        best = params.to_model();
      }
    }
  }
  return best;
}

}  // namespace inrv
