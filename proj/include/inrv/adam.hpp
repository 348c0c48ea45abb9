#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "inrv/tensor.hpp"

namespace inrv {

template <class T>
struct AdamState {
  detail::buffer<T> first_moment;
  detail::buffer<T> second_moment;
  std::int64_t step_count = 0;
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);

  explicit AdamState(std::int64_t n, T b1 = T(0.9), T b2 = T(0.999), T eps = T(1e-8))
      : first_moment(n), second_moment(n), beta1(b1), beta2(b2), epsilon(eps) {}
};

// One bias-corrected Adam update. Gradients must be finite.
template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, T lr) {
  if (params.size() != grads.size() || state.first_moment.size() != static_cast<std::int64_t>(params.size())) {
    throw dim_error("adam_step: state is not shape-congruent with parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) throw numeric_error("adam_step: non-finite gradient");
  }
  state.step_count += 1;
  const T b1 = state.beta1, b2 = state.beta2;
  const T c1 = T(1) - static_cast<T>(std::pow(static_cast<double>(b1), static_cast<double>(state.step_count)));
  const T c2 = T(1) - static_cast<T>(std::pow(static_cast<double>(b2), static_cast<double>(state.step_count)));
  T* m = state.first_moment.data();
  T* v = state.second_moment.data();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    m[i] = b1 * m[i] + (T(1) - b1) * g;
    v[i] = b2 * v[i] + (T(1) - b2) * g * g;
    const T m_hat = m[i] / c1;
    const T v_hat = v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

// Owns per-parameter Adam state for a set of leaf tensors.
template <class T>
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Tensor<T>> params, T lr, T beta1 = T(0.9), T beta2 = T(0.999),
                T epsilon = T(1e-8))
      : params_(std::move(params)), lr_(lr) {
    states_.reserve(params_.size());
    for (auto& p : params_) states_.emplace_back(p.size(), beta1, beta2, epsilon);
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      adam_step<T>(params_[i].values_mut(), params_[i].grad(), states_[i], lr_);
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  const std::vector<Tensor<T>>& params() const { return params_; }

 private:
  std::vector<Tensor<T>> params_;
  std::vector<AdamState<T>> states_;
  T lr_;
};

}  // namespace inrv
