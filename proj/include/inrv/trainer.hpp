#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "inrv/rng.hpp"
#include "inrv/siren.hpp"
#include "inrv/tensor.hpp"
#include "inrv/volume.hpp"

namespace inrv {

enum class Precision { Single, Double };

struct TrainConfig {
  double learning_rate = 0.0015;
  std::int64_t batch_size = 65536;
  std::int64_t iterations = 50000;
  std::int64_t eval_interval = 250;
  std::uint64_t seed = 0;
  Precision precision = Precision::Single;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainRecord {
  std::int64_t iteration = 0;
  double loss = 0.0;  // full-grid MSE on the [0,1] training scale
  double psnr_db = 0.0;
  double wall_clock_s = 0.0;  // cumulative training time, evaluation excluded
  std::int64_t peak_alloc_bytes = 0;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::int64_t best_iteration = 0;
  double best_psnr_db = 0.0;
};

struct TrainResult {
  SirenModel model;  // best-PSNR checkpoint
  TrainLog log;
};

struct ResourceProbe {
  std::int64_t peak_alloc_bytes = 0;
  double wall_clock_s = 0.0;
};

ResourceProbe resource_probe();

// Fits a SirenModel to the volume over its coordinate grid with Adam on MSE.
// Full-batch when the volume fits in one batch; otherwise uniform sampling
// without replacement per epoch. Returns the best-PSNR checkpoint.
TrainResult train_siren(const Volume& volume, const SirenConfig& siren_config,
                        const TrainConfig& train_config);

// Full-grid PSNR (dB) of the model against the volume, output clamped to
// [0,1] and mapped to the 0-255 scale. +infinity when exact.
double evaluate(const SirenModel& model, const Volume& volume);

// Model output materialized as a volume (clamped to [0,1]).
Volume render_to_volume(const SirenModel& model, std::array<std::int64_t, 3> dims, int bit_depth,
                        std::array<double, 3> spacing_mm);

void write_trainlog_csv(const TrainLog& log, const std::string& path);

// Uniform sampling without replacement within an epoch; epochs reshuffle.
template <class T>
class BatchSampler {
 public:
  BatchSampler(const CoordGrid& grid, const Volume& volume, std::int64_t batch_size)
      : grid_(&grid), volume_(&volume),
        batch_(std::min<std::int64_t>(batch_size, grid.count)),
        perm_(static_cast<std::size_t>(grid.count)) {
    if (batch_size < 1) throw dim_error("sample_batch: batch_size must be >= 1");
    if (grid.count != volume.voxel_count()) throw dim_error("sample_batch: grid/volume mismatch");
    for (std::int64_t i = 0; i < grid.count; ++i) perm_[i] = i;
  }

  // (coords [n x in_dim], targets [n x 1])
  std::pair<Tensor<T>, Tensor<T>> next(Rng& rng) {
    if (pos_ == 0) rng.shuffle(perm_);
    const std::int64_t n = std::min<std::int64_t>(batch_, grid_->count - pos_);
    const int d = grid_->in_dim;
    std::vector<T> coords(static_cast<std::size_t>(n) * d);
    std::vector<T> targets(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t src = perm_[pos_ + i];
      for (int c = 0; c < d; ++c) coords[i * d + c] = static_cast<T>(grid_->coords[src * d + c]);
      targets[i] = static_cast<T>(volume_->data[src]);
    }
    pos_ += n;
    if (pos_ >= grid_->count) pos_ = 0;
    return {Tensor<T>::from_data({n, d}, coords, false),
            Tensor<T>::from_data({n, 1}, targets, false)};
  }

 private:
  const CoordGrid* grid_;
  const Volume* volume_;
  std::int64_t batch_;
  std::vector<std::int64_t> perm_;
  std::int64_t pos_ = 0;
};

}  // namespace inrv
