#include "inrv/resample.hpp"

#include <algorithm>
#include <cmath>

namespace inrv {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

struct TapSet {
  std::vector<std::int64_t> index;   // clamped source indices
  std::vector<double> weight;        // normalized per output sample
  std::vector<std::int64_t> offset;  // start into index/weight per output sample
  std::vector<std::int64_t> count;
};

// Output sample j is centered at (j + 0.5) * scale - 0.5 in input coordinates;
// the kernel is stretched by max(scale, 1).
TapSet build_taps(std::int64_t old_size, std::int64_t new_size, int a) {
  TapSet taps;
  taps.offset.resize(static_cast<std::size_t>(new_size));
  taps.count.resize(static_cast<std::size_t>(new_size));
  const double scale = static_cast<double>(old_size) / static_cast<double>(new_size);
  const double stretch = std::max(scale, 1.0);
  const double support = a * stretch;
  for (std::int64_t j = 0; j < new_size; ++j) {
    const double center = (static_cast<double>(j) + 0.5) * scale - 0.5;
    const auto lo = static_cast<std::int64_t>(std::ceil(center - support));
    const auto hi = static_cast<std::int64_t>(std::floor(center + support));
    taps.offset[j] = static_cast<std::int64_t>(taps.index.size());
    double wsum = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const double w = lanczos((static_cast<double>(i) - center) / stretch, a);
      if (w == 0.0) continue;
      taps.index.push_back(std::clamp<std::int64_t>(i, 0, old_size - 1));
      taps.weight.push_back(w);
      wsum += w;
    }
    taps.count[j] = static_cast<std::int64_t>(taps.index.size()) - taps.offset[j];
    for (std::int64_t t = taps.offset[j]; t < taps.offset[j] + taps.count[j]; ++t) {
      taps.weight[t] /= wsum;
    }
  }
  return taps;
}

// One axis of a double-precision buffer, unclamped.
std::vector<double> filter_axis(const std::vector<double>& in, std::array<std::int64_t, 3> dims,
                                int axis, std::int64_t new_size, int a,
                                std::array<std::int64_t, 3>* out_dims) {
  const std::int64_t old_size = dims[axis];
  *out_dims = dims;
  (*out_dims)[axis] = new_size;
  if (new_size == old_size) return in;

  const TapSet taps = build_taps(old_size, new_size, a);
  std::vector<double> out(static_cast<std::size_t>((*out_dims)[0] * (*out_dims)[1] * (*out_dims)[2]));

  const std::array<std::int64_t, 3> strides_in{dims[1] * dims[2], dims[2], 1};
  const std::array<std::int64_t, 3> strides_out{(*out_dims)[1] * (*out_dims)[2], (*out_dims)[2], 1};
  const int u = axis == 0 ? 1 : 0;
  const int v = axis == 2 ? 1 : 2;
  for (std::int64_t cu = 0; cu < dims[u]; ++cu) {
    for (std::int64_t cv = 0; cv < dims[v]; ++cv) {
      const std::int64_t base_in = cu * strides_in[u] + cv * strides_in[v];
      const std::int64_t base_out = cu * strides_out[u] + cv * strides_out[v];
      for (std::int64_t j = 0; j < new_size; ++j) {
        double acc = 0.0;
        const std::int64_t off = taps.offset[j], cnt = taps.count[j];
        for (std::int64_t t = off; t < off + cnt; ++t) {
          acc += taps.weight[t] * in[base_in + taps.index[t] * strides_in[axis]];
        }
        out[base_out + j * strides_out[axis]] = acc;
      }
    }
  }
  return out;
}

std::vector<double> to_double(const Volume& v) {
  return {v.data.begin(), v.data.end()};
}

Volume from_double(const std::vector<double>& buf, std::array<std::int64_t, 3> dims,
                   const Volume& like, std::array<std::int64_t, 3> target) {
  Volume out = make_volume(dims, like.bit_depth, like.spacing_mm);
  for (int axis = 0; axis < 3; ++axis) {
    if (target[axis] != like.dims[axis]) {
      out.spacing_mm[axis] = like.spacing_mm[axis] * static_cast<double>(like.dims[axis]) /
                             static_cast<double>(target[axis]);
    }
  }
  for (std::size_t i = 0; i < buf.size(); ++i) {
    out.data[i] = static_cast<float>(std::clamp(buf[i], 0.0, 1.0));
  }
  return out;
}

Volume resample_all(const Volume& volume, std::array<std::int64_t, 3> target, int a) {
  std::vector<double> buf = to_double(volume);
  std::array<std::int64_t, 3> dims = volume.dims;
  for (int axis = 0; axis < 3; ++axis) {
    if (target[axis] != dims[axis]) {
      std::array<std::int64_t, 3> next{};
      buf = filter_axis(buf, dims, axis, target[axis], a, &next);
      dims = next;
    }
  }
  return from_double(buf, dims, volume, target);
}

}  // namespace

double lanczos(double x, int a) {
  if (a < 1) throw numeric_error("lanczos: a must be >= 1");
  const double ax = std::abs(x);
  if (ax >= static_cast<double>(a)) return 0.0;
  return sinc(x) * sinc(x / a);
}

Volume resample_axis(const Volume& volume, int axis, std::int64_t new_size, int a) {
  if (axis < 0 || axis > 2) throw dim_error("resample_axis: axis must be 0, 1 or 2");
  if (new_size < 1) throw dim_error("resample_axis: new_size must be >= 1");
  std::array<std::int64_t, 3> target = volume.dims;
  target[axis] = new_size;
  return resample_all(volume, target, a);
}

Volume downsample(const Volume& volume, std::array<std::int64_t, 3> target_dims, int a) {
  for (int axis = 0; axis < 3; ++axis) {
    if (target_dims[axis] < 1) throw dim_error("downsample: target dims must be positive");
    if (target_dims[axis] > volume.dims[axis]) {
      throw dim_error("downsample: target exceeds source along axis " + std::to_string(axis) +
                      " (use upsample)");
    }
  }
  return resample_all(volume, target_dims, a);
}

Volume upsample(const Volume& volume, std::array<std::int64_t, 3> target_dims, int a) {
  for (int axis = 0; axis < 3; ++axis) {
    if (target_dims[axis] < volume.dims[axis]) {
      throw dim_error("upsample: target smaller than source along axis " + std::to_string(axis) +
                      " (use downsample)");
    }
  }
  return resample_all(volume, target_dims, a);
}

Volume upsample_nearest(const Volume& volume, std::array<std::int64_t, 3> target_dims) {
  Volume out = make_volume(target_dims, volume.bit_depth, volume.spacing_mm);
  for (int axis = 0; axis < 3; ++axis) {
    out.spacing_mm[axis] = volume.spacing_mm[axis] * static_cast<double>(volume.dims[axis]) /
                           static_cast<double>(target_dims[axis]);
  }
  for (std::int64_t z = 0; z < target_dims[0]; ++z) {
    const auto sz = std::min<std::int64_t>(z * volume.dims[0] / target_dims[0], volume.dims[0] - 1);
    for (std::int64_t y = 0; y < target_dims[1]; ++y) {
      const auto sy = std::min<std::int64_t>(y * volume.dims[1] / target_dims[1], volume.dims[1] - 1);
      for (std::int64_t x = 0; x < target_dims[2]; ++x) {
        const auto sx = std::min<std::int64_t>(x * volume.dims[2] / target_dims[2], volume.dims[2] - 1);
        out.at(z, y, x) = volume.at(sz, sy, sx);
      }
    }
  }
  return out;
}

std::vector<double> resample2d_double(const std::vector<double>& in, std::int64_t h,
                                      std::int64_t w, std::int64_t out_h, std::int64_t out_w,
                                      int a) {
  if (static_cast<std::int64_t>(in.size()) != h * w) throw dim_error("resample2d_double: size mismatch");
  std::array<std::int64_t, 3> dims{1, h, w};
  std::array<std::int64_t, 3> next{};
  std::vector<double> buf = filter_axis(in, dims, 1, out_h, a, &next);
  dims = next;
  buf = filter_axis(buf, dims, 2, out_w, a, &next);
  for (auto& v : buf) v = std::clamp(v, 0.0, 1.0);
  return buf;
}

}  // namespace inrv
