// Hot float loops, compiled with fast-math so the sin/cos calls vectorize via
// libmvec. Finiteness checks live in the callers, which are compiled with
// strict IEEE semantics.

#include <cmath>
#include <cstdint>

namespace inrv::detail {

void vec_sin(const float* x, float* out, std::int64_t n, float omega) {
  for (std::int64_t i = 0; i < n; ++i) out[i] = std::sin(omega * x[i]);
}

void vec_sin_grad(const float* x, const float* gout, float* gin, std::int64_t n, float omega) {
  for (std::int64_t i = 0; i < n; ++i) gin[i] += omega * std::cos(omega * x[i]) * gout[i];
}

}  // namespace inrv::detail
