#pragma once

#include <array>
#include <cstdint>

#include "inrv/volume.hpp"

namespace inrv {

// PSNR/MSE are evaluated on the 0..255 intensity scale regardless of the
// source bit depth; identical inputs yield psnr_db = +infinity.
struct QualityReport {
  double mse = 0.0;
  double psnr_db = 0.0;
  std::array<std::int64_t, 3> dims{1, 0, 0};
  double peak_value = 255.0;
};

double mse(const Volume& a, const Volume& b);
double psnr(const Volume& a, const Volume& b);
QualityReport quality(const Volume& a, const Volume& b);

}  // namespace inrv
