#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "inrv/volume.hpp"

namespace inrv {

// Windowed-sinc kernel: sinc(pi x) * sinc(pi x / a) for |x| < a, else 0.
double lanczos(double x, int a);

// 1-D Lanczos filtering along one axis (0=z, 1=y, 2=x). When downscaling the
// kernel is stretched by the scale factor (anti-aliasing); tap weights are
// normalized to sum to 1; edges clamp to border voxels; output is clamped to
// [0,1]. Filtering runs in double precision and quantizes to the volume's
// float storage once at the end.
Volume resample_axis(const Volume& volume, int axis, std::int64_t new_size, int a);

// Separable per-axis resampling to explicit target dims (callers pass targets,
// no rounding rule is inferred). All axes are filtered in one double-precision
// pipeline with a single final clamp.
Volume downsample(const Volume& volume, std::array<std::int64_t, 3> target_dims, int a);
Volume upsample(const Volume& volume, std::array<std::int64_t, 3> target_dims, int a);

// Nearest-neighbor baseline upsampler.
Volume upsample_nearest(const Volume& volume, std::array<std::int64_t, 3> target_dims);

// Double-precision separable core for one plane; the Volume wrappers above are
// built on this.
std::vector<double> resample2d_double(const std::vector<double>& in, std::int64_t h,
                                      std::int64_t w, std::int64_t out_h, std::int64_t out_w,
                                      int a);

}  // namespace inrv
