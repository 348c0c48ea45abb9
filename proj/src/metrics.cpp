#include "inrv/metrics.hpp"

#include <cmath>
#include <limits>

namespace inrv {

double mse(const Volume& a, const Volume& b) {
  if (a.dims != b.dims) throw dim_error("mse: dims mismatch");
  const std::int64_t n = a.voxel_count();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = 255.0 * (static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

double psnr(const Volume& a, const Volume& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

QualityReport quality(const Volume& a, const Volume& b) {
  QualityReport r;
  r.dims = a.dims;
  r.mse = mse(a, b);
  r.psnr_db = r.mse == 0.0 ? std::numeric_limits<double>::infinity()
                           : 10.0 * std::log10(255.0 * 255.0 / r.mse);
  return r;
}

}  // namespace inrv
