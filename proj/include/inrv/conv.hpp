#pragma once

#include <vector>

#include "inrv/tensor.hpp"

namespace inrv {

namespace detail {

struct ConvGeom {
  std::int64_t channels, height, width;
  std::int64_t kh, kw;
  std::int64_t stride, padding;
  std::int64_t out_h, out_w;
};

// cols is [(C*kh*kw) x (out_h*out_w)], zero padding outside the image.
template <class T>
void im2col(const T* img, const ConvGeom& g, T* cols) {
  const std::int64_t patch = g.kh * g.kw;
  const std::int64_t out_n = g.out_h * g.out_w;
  for (std::int64_t c = 0; c < g.channels; ++c) {
    for (std::int64_t i = 0; i < g.kh; ++i) {
      for (std::int64_t j = 0; j < g.kw; ++j) {
        T* row = cols + (c * patch + i * g.kw + j) * out_n;
        for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
          const std::int64_t y = oy * g.stride - g.padding + i;
          const bool y_ok = y >= 0 && y < g.height;
          for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
            const std::int64_t x = ox * g.stride - g.padding + j;
            row[oy * g.out_w + ox] =
                (y_ok && x >= 0 && x < g.width) ? img[(c * g.height + y) * g.width + x] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds cols back into the image buffer.
template <class T>
void col2im(const T* cols, const ConvGeom& g, T* img) {
  const std::int64_t patch = g.kh * g.kw;
  const std::int64_t out_n = g.out_h * g.out_w;
  for (std::int64_t c = 0; c < g.channels; ++c) {
    for (std::int64_t i = 0; i < g.kh; ++i) {
      for (std::int64_t j = 0; j < g.kw; ++j) {
        const T* row = cols + (c * patch + i * g.kw + j) * out_n;
        for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
          const std::int64_t y = oy * g.stride - g.padding + i;
          if (y < 0 || y >= g.height) continue;
          for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
            const std::int64_t x = ox * g.stride - g.padding + j;
            if (x < 0 || x >= g.width) continue;
            img[(c * g.height + y) * g.width + x] += row[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

inline ConvGeom conv_geometry(const std::vector<std::int64_t>& in_shape, std::int64_t kh,
                              std::int64_t kw, std::int64_t stride, std::int64_t padding) {
  ConvGeom g{in_shape[0], in_shape[1], in_shape[2], kh, kw, stride, padding, 0, 0};
  const std::int64_t hn = g.height + 2 * padding - kh;
  const std::int64_t wn = g.width + 2 * padding - kw;
  if (hn < 0 || wn < 0 || hn % stride != 0 || wn % stride != 0) {
    throw dim_error("conv2d: non-integral output size");
  }
  g.out_h = hn / stride + 1;
  g.out_w = wn / stride + 1;
  return g;
}

}  // namespace detail

// input: [C x H x W], kernels: [F x C x kh x kw]. Cross-correlation with zero
// padding; kernels must be odd-sized.
template <class T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels, std::int64_t stride,
                 std::int64_t padding) {
  if (input.shape().size() != 3) throw dim_error("conv2d: input must be [C x H x W]");
  if (kernels.shape().size() != 4) throw dim_error("conv2d: kernels must be [F x C x kh x kw]");
  if (kernels.shape()[1] != input.shape()[0]) throw dim_error("conv2d: channel mismatch");
  const std::int64_t kh = kernels.shape()[2], kw = kernels.shape()[3];
  if (kh % 2 == 0 || kw % 2 == 0) throw dim_error("conv2d: kernel sides must be odd");
  if (stride < 1) throw dim_error("conv2d: stride must be >= 1");
  if (padding < 0) throw dim_error("conv2d: negative padding");

  const auto g = detail::conv_geometry(input.shape(), kh, kw, stride, padding);
  const std::int64_t f = kernels.shape()[0];
  const std::int64_t patch_rows = g.channels * kh * kw;
  const std::int64_t out_n = g.out_h * g.out_w;

  Tensor<T> out = detail::make_result<T>({f, g.out_h, g.out_w}, {input, kernels});
  {
    detail::buffer<T> cols(patch_rows * out_n);
    detail::im2col(input.values().data(), g, cols.data());
    detail::gemm(false, false, f, out_n, patch_rows, T(1), kernels.values().data(), patch_rows,
                 cols.data(), out_n, T(0), out.node()->data.data(), out_n);
  }
  detail::ensure_finite(out.values().data(), out.size(), "conv2d");

  if (out.requires_grad()) {
    out.node()->backprop = [g, f, patch_rows, out_n](detail::Node<T>& self) {
      auto& in_node = *self.parents[0];
      auto& k_node = *self.parents[1];
      const T* gout = self.grad.data();
      detail::buffer<T> cols(patch_rows * out_n);
      if (k_node.requires_grad) {
        detail::im2col(in_node.data.data(), g, cols.data());
        k_node.ensure_grad();
        // dK += dOut * cols^T
        detail::gemm(false, true, f, patch_rows, out_n, T(1), gout, out_n, cols.data(), out_n, T(1),
                     k_node.grad.data(), patch_rows);
      }
      if (in_node.requires_grad) {
        in_node.ensure_grad();
        // dIn += col2im(K^T * dOut)
        detail::gemm(true, false, patch_rows, out_n, f, T(1), k_node.data.data(), patch_rows, gout,
                     out_n, T(0), cols.data(), out_n);
        detail::col2im(cols.data(), g, in_node.grad.data());
      }
    };
  }
  return out;
}

// input: [C x H x W], kernels: [C x F x kh x kw]. Transposed convolution, the
// adjoint of conv2d with identical geometry: output is [F x H'' x W''] with
// H'' = (H-1)*stride - 2*padding + kh.
template <class T>
Tensor<T> deconv2d(const Tensor<T>& input, const Tensor<T>& kernels, std::int64_t stride,
                   std::int64_t padding) {
  if (input.shape().size() != 3) throw dim_error("deconv2d: input must be [C x H x W]");
  if (kernels.shape().size() != 4) throw dim_error("deconv2d: kernels must be [C x F x kh x kw]");
  if (kernels.shape()[0] != input.shape()[0]) throw dim_error("deconv2d: channel mismatch");
  if (stride < 1) throw dim_error("deconv2d: stride must be >= 1");
  if (padding < 0) throw dim_error("deconv2d: negative padding");
  const std::int64_t c = input.shape()[0], h = input.shape()[1], w = input.shape()[2];
  const std::int64_t f = kernels.shape()[1], kh = kernels.shape()[2], kw = kernels.shape()[3];
  const std::int64_t out_h = (h - 1) * stride - 2 * padding + kh;
  const std::int64_t out_w = (w - 1) * stride - 2 * padding + kw;
  if (out_h < 1 || out_w < 1) throw dim_error("deconv2d: invalid geometry");

  // geometry of the adjoint convolution: [F x out_h x out_w] -> [h x w]
  const auto g = detail::conv_geometry({f, out_h, out_w}, kh, kw, stride, padding);
  const std::int64_t patch_rows = f * kh * kw;
  const std::int64_t in_n = h * w;

  Tensor<T> out = detail::make_result<T>({f, out_h, out_w}, {input, kernels});
  {
    detail::buffer<T> cols(patch_rows * in_n);
    // cols = K^T (viewed [C x (F*kh*kw)])^T * input
    detail::gemm(true, false, patch_rows, in_n, c, T(1), kernels.values().data(), patch_rows,
                 input.values().data(), in_n, T(0), cols.data(), in_n);
    detail::col2im(cols.data(), g, out.node()->data.data());
  }
  detail::ensure_finite(out.values().data(), out.size(), "deconv2d");

  if (out.requires_grad()) {
    out.node()->backprop = [g, c, patch_rows, in_n](detail::Node<T>& self) {
      auto& in_node = *self.parents[0];
      auto& k_node = *self.parents[1];
      detail::buffer<T> cols(patch_rows * in_n);
      detail::im2col(self.grad.data(), g, cols.data());
      if (in_node.requires_grad) {
        in_node.ensure_grad();
        // dIn += K * im2col(dOut)
        detail::gemm(false, false, c, in_n, patch_rows, T(1), k_node.data.data(), patch_rows,
                     cols.data(), in_n, T(1), in_node.grad.data(), in_n);
      }
      if (k_node.requires_grad) {
        k_node.ensure_grad();
        // dK += input * im2col(dOut)^T
        detail::gemm(false, true, c, patch_rows, in_n, T(1), in_node.data.data(), in_n, cols.data(),
                     in_n, T(1), k_node.grad.data(), patch_rows);
      }
    };
  }
  return out;
}

// parts: [C_i x H x W] with equal spatial dims -> [sum(C_i) x H x W]
template <class T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw dim_error("concat_channels: empty input list");
  const std::int64_t h = parts[0].shape()[1], w = parts[0].shape()[2];
  std::int64_t channels = 0;
  for (const auto& p : parts) {
    if (p.shape().size() != 3) throw dim_error("concat_channels: parts must be [C x H x W]");
    if (p.shape()[1] != h || p.shape()[2] != w) throw dim_error("concat_channels: spatial mismatch");
    channels += p.shape()[0];
  }
  Tensor<T> out = detail::make_result<T>({channels, h, w}, parts);
  T* op = out.node()->data.data();
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.values().begin(), p.values().end(), op + offset);
    offset += p.size();
  }
  if (out.requires_grad()) {
    out.node()->backprop = [](detail::Node<T>& self) {
      const T* g = self.grad.data();
      std::int64_t offset = 0;
      for (auto& pn : self.parents) {
        if (pn->requires_grad) {
          pn->ensure_grad();
          T* gp = pn->grad.data();
          for (std::int64_t i = 0; i < pn->size; ++i) gp[i] += g[offset + i];
        }
        offset += pn->size;
      }
    };
  }
  return out;
}

// x: [C x H x W], bias: [C]
template <class T>
Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  if (x.shape().size() != 3 || bias.shape().size() != 1 || bias.shape()[0] != x.shape()[0]) {
    throw dim_error("add_channel_bias: expected [C x H x W] plus [C]");
  }
  const std::int64_t c = x.shape()[0], plane = x.shape()[1] * x.shape()[2];
  Tensor<T> out = detail::make_result<T>(x.shape(), {x, bias});
  const T* xp = x.values().data();
  const T* bp = bias.values().data();
  T* op = out.node()->data.data();
  for (std::int64_t ch = 0; ch < c; ++ch)
    for (std::int64_t i = 0; i < plane; ++i) op[ch * plane + i] = xp[ch * plane + i] + bp[ch];
  detail::ensure_finite(op, out.size(), "add_channel_bias");
  if (out.requires_grad()) {
    out.node()->backprop = [c, plane](detail::Node<T>& self) {
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
        for (std::int64_t ch = 0; ch < c; ++ch) {
          double acc = 0.0;
          for (std::int64_t i = 0; i < plane; ++i) acc += static_cast<double>(g[ch * plane + i]);
          gb[ch] += static_cast<T>(acc);
        }
      }
    };
  }
  return out;
}

}  // namespace inrv
