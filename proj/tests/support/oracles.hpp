#pragma once

// Test-only reference implementations, deliberately independent of the
// library's compute paths: brute-force loops and scalar recomputations used to
// derive expected values.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

// Central finite differences of a scalar function of a flat parameter vector.
inline std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Six nested loops, zero padding, cross-correlation.
inline std::vector<double> conv2d_naive(const std::vector<double>& in, int c_in, int h, int w,
                                        const std::vector<double>& k, int f, int kh, int kw,
                                        int stride, int pad, int* out_h, int* out_w) {
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  *out_h = oh;
  *out_w = ow;
  std::vector<double> out(static_cast<std::size_t>(f) * oh * ow, 0.0);
  for (int of = 0; of < f; ++of)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int c = 0; c < c_in; ++c)
          for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j) {
              const int y = oy * stride - pad + i;
              const int x = ox * stride - pad + j;
              if (y < 0 || y >= h || x < 0 || x >= w) continue;
              acc += in[(static_cast<std::size_t>(c) * h + y) * w + x] *
                     k[((static_cast<std::size_t>(of) * c_in + c) * kh + i) * kw + j];
            }
        out[(static_cast<std::size_t>(of) * oh + oy) * ow + ox] = acc;
      }
  return out;
}

inline double lanczos_ref(double x, int a) {
  if (std::abs(x) >= a) return 0.0;
  auto sinc = [](double t) {
    if (t == 0.0) return 1.0;
    const double pt = 3.14159265358979323846 * t;
    return std::sin(pt) / pt;
  };
  return sinc(x) * sinc(x / a);
}

// Direct (non-separable) 2-D Lanczos resample of one slice: a full double sum
// over the 2-D stretched kernel with per-sample normalization and clamped
// borders. Checks the library's separable implementation.
inline std::vector<double> lanczos2d_direct(const std::vector<double>& in, int h, int w, int oh,
                                            int ow, int a) {
  const double sy = static_cast<double>(h) / oh;
  const double sx = static_cast<double>(w) / ow;
  const double stretch_y = std::max(sy, 1.0);
  const double stretch_x = std::max(sx, 1.0);
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int oy = 0; oy < oh; ++oy) {
    const double cy = (oy + 0.5) * sy - 0.5;
    for (int ox = 0; ox < ow; ++ox) {
      const double cx = (ox + 0.5) * sx - 0.5;
      double acc = 0.0, wsum = 0.0;
      const int y_lo = static_cast<int>(std::ceil(cy - a * stretch_y));
      const int y_hi = static_cast<int>(std::floor(cy + a * stretch_y));
      const int x_lo = static_cast<int>(std::ceil(cx - a * stretch_x));
      const int x_hi = static_cast<int>(std::floor(cx + a * stretch_x));
      for (int y = y_lo; y <= y_hi; ++y) {
        const double wy = lanczos_ref((y - cy) / stretch_y, a);
        if (wy == 0.0) continue;
        const int yc = std::clamp(y, 0, h - 1);
        for (int x = x_lo; x <= x_hi; ++x) {
          const double wx = lanczos_ref((x - cx) / stretch_x, a);
          if (wx == 0.0) continue;
          const int xc = std::clamp(x, 0, w - 1);
          acc += wy * wx * in[static_cast<std::size_t>(yc) * w + xc];
          wsum += wy * wx;
        }
      }
      out[static_cast<std::size_t>(oy) * ow + ox] = std::clamp(acc / wsum, 0.0, 1.0);
    }
  }
  return out;
}

// One-file scalar PSNR on the 0..255 scale.
inline double psnr_ref(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = 255.0 * (a[i] - b[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Scalar Adam with bias correction.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  double step(double w, double g, double lr) {
    ++t;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double mh = m / (1.0 - std::pow(beta1, t));
    const double vh = v / (1.0 - std::pow(beta2, t));
    return w - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace oracle
