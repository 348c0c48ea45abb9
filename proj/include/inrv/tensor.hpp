#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "inrv/alloc.hpp"
#include "inrv/errors.hpp"

namespace inrv {

namespace detail {

// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C.
// Backed by OpenBLAS when available, a blocked fallback otherwise.
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, float alpha,
          const float* a, std::int64_t lda, const float* b, std::int64_t ldb, float beta, float* c,
          std::int64_t ldc);
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, double alpha,
          const double* a, std::int64_t lda, const double* b, std::int64_t ldb, double beta,
          double* c, std::int64_t ldc);

// Vectorized float transcendentals (fast-math translation unit).
void vec_sin(const float* x, float* out, std::int64_t n, float omega);
void vec_sin_grad(const float* x, const float* gout, float* gin, std::int64_t n, float omega);

// Accounted flat buffer; zero-initialized.
template <class T>
class buffer {
 public:
  buffer() = default;
  explicit buffer(std::int64_t n) : n_(n), p_(n > 0 ? new T[static_cast<std::size_t>(n)]() : nullptr) {
    memory::detail::add(bytes());
  }
  buffer(const buffer&) = delete;
  buffer& operator=(const buffer&) = delete;
  buffer(buffer&& other) noexcept : n_(other.n_), p_(std::move(other.p_)) { other.n_ = 0; }
  buffer& operator=(buffer&& other) noexcept {
    if (this != &other) {
      memory::detail::sub(bytes());
      n_ = other.n_;
      p_ = std::move(other.p_);
      other.n_ = 0;
    }
    return *this;
  }
  ~buffer() { memory::detail::sub(bytes()); }

  std::int64_t size() const { return n_; }
  std::int64_t bytes() const { return n_ * static_cast<std::int64_t>(sizeof(T)); }
  T* data() { return p_.get(); }
  const T* data() const { return p_.get(); }
  std::span<T> span() { return {p_.get(), static_cast<std::size_t>(n_)}; }
  std::span<const T> span() const { return {p_.get(), static_cast<std::size_t>(n_)}; }

 private:
  std::int64_t n_ = 0;
  std::unique_ptr<T[]> p_;
};

inline std::int64_t shape_size(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

template <class T>
struct Node {
  std::vector<std::int64_t> shape;
  std::int64_t size = 0;
  buffer<T> data;
  buffer<T> grad;  // empty until required
  bool requires_grad = false;
  bool backward_done = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  explicit Node(std::vector<std::int64_t> s)
      : shape(std::move(s)), size(shape_size(shape)), data(size) {}

  void ensure_grad() {
    if (grad.size() != size) grad = buffer<T>(size);
  }
};

template <class T>
void ensure_finite(const T* p, std::int64_t n, const char* op) {
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) {
      throw numeric_error(std::string(op) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

}  // namespace detail

// Dense tensor participating in a recorded computation graph. Value-semantic
// handle; node storage is shared. Leaf data is mutable (loaders, optimizer);
// op results are immutable.
template <class T>
class Tensor {
 public:
  using Scalar = T;

  Tensor() = default;

  static Tensor zeros(std::vector<std::int64_t> shape, bool requires_grad = false) {
    Tensor t;
    t.node_ = std::make_shared<detail::Node<T>>(std::move(shape));
    t.node_->requires_grad = requires_grad;
    if (requires_grad) t.node_->ensure_grad();
    return t;
  }

  static Tensor from_data(std::vector<std::int64_t> shape, std::span<const T> values,
                          bool requires_grad = false) {
    Tensor t = zeros(std::move(shape), requires_grad);
    if (static_cast<std::int64_t>(values.size()) != t.size()) {
      throw dim_error("from_data: value count does not match shape");
    }
    std::copy(values.begin(), values.end(), t.node_->data.data());
    detail::ensure_finite(t.node_->data.data(), t.size(), "from_data");
    return t;
  }

  static Tensor scalar(T value, bool requires_grad = false) {
    const T v[1] = {value};
    return from_data({1}, std::span<const T>(v, 1), requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::int64_t>& shape() const { return node_->shape; }
  std::int64_t size() const { return node_->size; }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const T> values() const { return node_->data.span(); }
  // Leaf mutation only (optimizer steps, staging buffers).
  std::span<T> values_mut() {
    if (!node_->parents.empty()) throw numeric_error("values_mut: op results are immutable");
    return node_->data.span();
  }

  bool has_grad() const { return node_->grad.size() == node_->size; }
  std::span<const T> grad() const {
    if (!has_grad()) throw numeric_error("grad: no gradient buffer present");
    return node_->grad.span();
  }
  std::span<T> grad_mut() {
    node_->ensure_grad();
    return node_->grad.span();
  }

  void zero_grad() {
    if (node_->grad.size() > 0) std::fill(node_->grad.data(), node_->grad.data() + node_->grad.size(), T(0));
    node_->backward_done = false;
  }

  T item() const {
    if (size() != 1) throw dim_error("item: tensor is not scalar");
    return values()[0];
  }

  detail::Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node<T>>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

namespace detail {

template <class T>
Tensor<T> make_result(std::vector<std::int64_t> shape, std::vector<Tensor<T>> parents) {
  bool req = false;
  for (const auto& p : parents) req = req || p.requires_grad();
  Tensor<T> out = Tensor<T>::zeros(std::move(shape), false);
  out.node()->requires_grad = req;
  for (auto& p : parents) out.node()->parents.push_back(p.node_ptr());
  return out;
}

}  // namespace detail

// ---- elementwise ops -------------------------------------------------------

template <class T>
Tensor<T> sine(const Tensor<T>& x, T omega) {
  if (!(omega > T(0))) throw numeric_error("sine: omega must be positive");
  Tensor<T> out = detail::make_result<T>(x.shape(), {x});
  const std::int64_t n = x.size();
  if constexpr (std::is_same_v<T, float>) {
    detail::vec_sin(x.values().data(), out.node()->data.data(), n, omega);
  } else {
    const T* xp = x.values().data();
    T* op = out.node()->data.data();
    for (std::int64_t i = 0; i < n; ++i) op[i] = std::sin(omega * xp[i]);
  }
  detail::ensure_finite(out.values().data(), n, "sine");
  if (out.requires_grad()) {
    out.node()->backprop = [omega](detail::Node<T>& self) {
      auto& xn = *self.parents[0];
      if (!xn.requires_grad) return;
      xn.ensure_grad();
      if constexpr (std::is_same_v<T, float>) {
        detail::vec_sin_grad(xn.data.data(), self.grad.data(), xn.grad.data(), self.size, omega);
      } else {
        const T* xp = xn.data.data();
        const T* g = self.grad.data();
        T* gx = xn.grad.data();
        for (std::int64_t i = 0; i < self.size; ++i) gx[i] += omega * std::cos(omega * xp[i]) * g[i];
      }
    };
  }
  return out;
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out = detail::make_result<T>(x.shape(), {x});
  const std::int64_t n = x.size();
  const T* xp = x.values().data();
  T* op = out.node()->data.data();
  for (std::int64_t i = 0; i < n; ++i) op[i] = xp[i] > T(0) ? xp[i] : T(0);
  detail::ensure_finite(op, n, "relu");
  if (out.requires_grad()) {
    out.node()->backprop = [](detail::Node<T>& self) {
      auto& xn = *self.parents[0];
      if (!xn.requires_grad) return;
      xn.ensure_grad();
      const T* xp = xn.data.data();
      const T* g = self.grad.data();
      T* gx = xn.grad.data();
      // subgradient at 0 is 0
      for (std::int64_t i = 0; i < self.size; ++i) gx[i] += xp[i] > T(0) ? g[i] : T(0);
    };
  }
  return out;
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  Tensor<T> out = detail::make_result<T>(x.shape(), {x});
  const std::int64_t n = x.size();
  const T* xp = x.values().data();
  T* op = out.node()->data.data();
  for (std::int64_t i = 0; i < n; ++i) op[i] = factor * xp[i];
  detail::ensure_finite(op, n, "scale");
  if (out.requires_grad()) {
    out.node()->backprop = [factor](detail::Node<T>& self) {
      auto& xn = *self.parents[0];
      if (!xn.requires_grad) return;
      xn.ensure_grad();
      const T* g = self.grad.data();
      T* gx = xn.grad.data();
      for (std::int64_t i = 0; i < self.size; ++i) gx[i] += factor * g[i];
    };
  }
  return out;
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw dim_error("add: shape mismatch");
  Tensor<T> out = detail::make_result<T>(a.shape(), {a, b});
  const std::int64_t n = a.size();
  const T* ap = a.values().data();
  const T* bp = b.values().data();
  T* op = out.node()->data.data();
  for (std::int64_t i = 0; i < n; ++i) op[i] = ap[i] + bp[i];
  detail::ensure_finite(op, n, "add");
  if (out.requires_grad()) {
    out.node()->backprop = [](detail::Node<T>& self) {
      const T* g = self.grad.data();
      for (auto& pn : self.parents) {
        if (!pn->requires_grad) continue;
        pn->ensure_grad();
        T* gp = pn->grad.data();
        for (std::int64_t i = 0; i < self.size; ++i) gp[i] += g[i];
      }
    };
  }
  return out;
}

// ---- linear algebra --------------------------------------------------------

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2) throw dim_error("matmul: operands must be 2-D");
  const std::int64_t m = a.shape()[0], k = a.shape()[1];
  if (b.shape()[0] != k) {
    throw dim_error("matmul: inner dimensions disagree (" + std::to_string(k) + " vs " +
                    std::to_string(b.shape()[0]) + ")");
  }
  const std::int64_t n = b.shape()[1];
  Tensor<T> out = detail::make_result<T>({m, n}, {a, b});
  detail::gemm(false, false, m, n, k, T(1), a.values().data(), k, b.values().data(), n, T(0),
               out.node()->data.data(), n);
  detail::ensure_finite(out.values().data(), out.size(), "matmul");
  if (out.requires_grad()) {
    out.node()->backprop = [m, n, k](detail::Node<T>& self) {
      auto& an = *self.parents[0];
      auto& bn = *self.parents[1];
      const T* g = self.grad.data();
      if (an.requires_grad) {
        an.ensure_grad();
        // dA += dC * B^T
        detail::gemm(false, true, m, k, n, T(1), g, n, bn.data.data(), n, T(1), an.grad.data(), k);
      }
      if (bn.requires_grad) {
        bn.ensure_grad();
        // dB += A^T * dC
        detail::gemm(true, false, k, n, m, T(1), an.data.data(), k, g, n, T(1), bn.grad.data(), n);
      }
    };
  }
  return out;
}

// x: [N x F], bias: [F]
template <class T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  if (x.shape().size() != 2 || bias.shape().size() != 1 || bias.shape()[0] != x.shape()[1]) {
    throw dim_error("add_bias: expected [N x F] plus [F]");
  }
  const std::int64_t rows = x.shape()[0], cols = x.shape()[1];
  Tensor<T> out = detail::make_result<T>(x.shape(), {x, bias});
  const T* xp = x.values().data();
  const T* bp = bias.values().data();
  T* op = out.node()->data.data();
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) op[r * cols + c] = xp[r * cols + c] + bp[c];
  detail::ensure_finite(op, out.size(), "add_bias");
  if (out.requires_grad()) {
    out.node()->backprop = [rows, cols](detail::Node<T>& self) {
      auto& xn = *self.parents[0];
      auto& bn = *self.parents[1];
      const T* g = self.grad.data();
      if (xn.requires_grad) {
        xn.ensure_grad();
        T* gx = xn.grad.data();
        for (std::int64_t i = 0; i < self.size; ++i) gx[i] += g[i];
      }
      if (bn.requires_grad) {
        bn.ensure_grad();
        T* gb = bn.grad.data();
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    };
  }
  return out;
}

// ---- reductions ------------------------------------------------------------

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  Tensor<T> out = detail::make_result<T>({1}, {x});
  const T* xp = x.values().data();
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) acc += static_cast<double>(xp[i]);
  out.node()->data.data()[0] = static_cast<T>(acc);
  detail::ensure_finite(out.values().data(), 1, "sum");
  if (out.requires_grad()) {
    out.node()->backprop = [](detail::Node<T>& self) {
      auto& xn = *self.parents[0];
      if (!xn.requires_grad) return;
      xn.ensure_grad();
      const T g = self.grad.data()[0];
      T* gx = xn.grad.data();
      for (std::int64_t i = 0; i < xn.size; ++i) gx[i] += g;
    };
  }
  return out;
}

template <class T>
Tensor<T> mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  if (prediction.shape() != target.shape()) throw dim_error("mse_loss: shape mismatch");
  const std::int64_t n = prediction.size();
  Tensor<T> out = detail::make_result<T>({1}, {prediction, target});
  const T* pp = prediction.values().data();
  const T* tp = target.values().data();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pp[i]) - static_cast<double>(tp[i]);
    acc += d * d;
  }
  out.node()->data.data()[0] = static_cast<T>(acc / static_cast<double>(n));
  detail::ensure_finite(out.values().data(), 1, "mse_loss");
  if (out.requires_grad()) {
    out.node()->backprop = [n](detail::Node<T>& self) {
      auto& pn = *self.parents[0];
      auto& tn = *self.parents[1];
      const T g = self.grad.data()[0];
      const T scale_term = T(2) / static_cast<T>(n) * g;
      const T* pp = pn.data.data();
      const T* tp = tn.data.data();
      if (pn.requires_grad) {
        pn.ensure_grad();
        T* gp = pn.grad.data();
        for (std::int64_t i = 0; i < n; ++i) gp[i] += scale_term * (pp[i] - tp[i]);
      }
      if (tn.requires_grad) {
        tn.ensure_grad();
        T* gt = tn.grad.data();
        for (std::int64_t i = 0; i < n; ++i) gt[i] -= scale_term * (pp[i] - tp[i]);
      }
    };
  }
  return out;
}

// ---- backward --------------------------------------------------------------

template <class T>
void backward(const Tensor<T>& loss) {
  auto* root = loss.node();
  if (root == nullptr) throw numeric_error("backward: undefined tensor");
  if (root->size != 1) throw dim_error("backward: loss must be scalar");
  if (root->backward_done) throw numeric_error("backward: already called on this graph");
  if (!root->requires_grad) throw numeric_error("backward: loss does not require grad");

  // post-order DFS
  std::vector<detail::Node<T>*> order;
  std::unordered_set<detail::Node<T>*> seen;
  std::vector<std::pair<detail::Node<T>*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      auto* parent = node->parents[idx].get();
      ++idx;
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad.data()[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto* node = *it;
    if (node->backprop && node->grad.size() == node->size) node->backprop(*node);
  }
  root->backward_done = true;
}

}  // namespace inrv
