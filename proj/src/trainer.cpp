#include "inrv/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "inrv/adam.hpp"
#include "inrv/alloc.hpp"
#include "inrv/metrics.hpp"

namespace inrv {

namespace {

using clock_type = std::chrono::steady_clock;

struct EvalResult {
  double loss = 0.0;  // unclamped full-grid MSE, [0,1] scale
  double psnr_db = 0.0;
};

// Single pass over the full grid: training-scale loss and decode-style PSNR.
EvalResult eval_full_grid(const SirenModel& model, const CoordGrid& grid, const Volume& volume) {
  const std::vector<float> raw = siren_forward(model, grid);
  double acc_raw = 0.0, acc_clamped = 0.0;
  const std::int64_t n = volume.voxel_count();
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = volume.data[i];
    const double p = raw[i];
    acc_raw += (p - t) * (p - t);
    const double pc = std::clamp(p, 0.0, 1.0);
    const double d = 255.0 * (pc - t);
    acc_clamped += d * d;
  }
  EvalResult r;
  r.loss = acc_raw / static_cast<double>(n);
  const double mse255 = acc_clamped / static_cast<double>(n);
  r.psnr_db = mse255 == 0.0 ? std::numeric_limits<double>::infinity()
                            : 10.0 * std::log10(255.0 * 255.0 / mse255);
  return r;
}

template <class T>
TrainResult train_impl(const Volume& volume, const SirenConfig& siren_config,
                       const TrainConfig& train_config) {
  if (volume.voxel_count() < 1) throw dim_error("train_siren: empty volume");
  if (train_config.iterations < 1 || train_config.batch_size < 1 || train_config.eval_interval < 1) {
    throw dim_error("train_siren: config values must be positive");
  }
  const CoordGrid grid = coord_grid(volume.dims);
  if (grid.in_dim != siren_config.in_dim) {
    throw dim_error("train_siren: volume dimensionality (" + std::to_string(grid.in_dim) +
                    ") does not match siren in_dim (" + std::to_string(siren_config.in_dim) + ")");
  }

  memory::reset_peak();
  SirenModel model = siren_init(siren_config);
  auto params = SirenParams<T>::from_model(model, true);
  AdamOptimizer<T> optimizer(params.all(), static_cast<T>(train_config.learning_rate),
                             static_cast<T>(train_config.beta1), static_cast<T>(train_config.beta2),
                             static_cast<T>(train_config.epsilon));
  Rng rng(train_config.seed);

  const bool full_batch = volume.voxel_count() <= train_config.batch_size;
  BatchSampler<T> sampler(grid, volume, train_config.batch_size);
  Tensor<T> full_coords, full_targets;
  if (full_batch) {
    auto batch = sampler.next(rng);
    full_coords = batch.first;
    full_targets = batch.second;
  }

  TrainLog log;
  SirenModel best_model = model;
  auto record_eval = [&](std::int64_t iteration, double train_seconds) {
    const SirenModel snapshot = params.to_model();
    const EvalResult ev = eval_full_grid(snapshot, grid, volume);
    log.records.push_back({iteration, ev.loss, ev.psnr_db, train_seconds, memory::peak_bytes()});
    if (log.records.size() == 1 || ev.psnr_db > log.best_psnr_db) {
      log.best_psnr_db = ev.psnr_db;
      log.best_iteration = iteration;
      best_model = snapshot;
    }
  };

  record_eval(0, 0.0);
  double train_seconds = 0.0;
  for (std::int64_t iter = 1; iter <= train_config.iterations; ++iter) {
    const auto t0 = clock_type::now();
    try {
      Tensor<T> coords, targets;
      if (full_batch) {
        coords = full_coords;
        targets = full_targets;
      } else {
        auto batch = sampler.next(rng);
        coords = batch.first;
        targets = batch.second;
      }
      optimizer.zero_grad();
      auto loss = mse_loss(siren_apply(params, coords), targets);
      backward(loss);
      optimizer.step();
    } catch (const numeric_error& e) {
      throw numeric_error("train_siren: aborted at iteration " + std::to_string(iter) + ": " +
                          e.what());
    }
    train_seconds += std::chrono::duration<double>(clock_type::now() - t0).count();
    if (iter % train_config.eval_interval == 0 || iter == train_config.iterations) {
      record_eval(iter, train_seconds);
    }
  }

  return {std::move(best_model), std::move(log)};
}

}  // namespace

ResourceProbe resource_probe() { return {memory::peak_bytes(), memory::wall_clock_s()}; }

TrainResult train_siren(const Volume& volume, const SirenConfig& siren_config,
                        const TrainConfig& train_config) {
  if (train_config.precision == Precision::Double) {
    return train_impl<double>(volume, siren_config, train_config);
  }
  return train_impl<float>(volume, siren_config, train_config);
}

double evaluate(const SirenModel& model, const Volume& volume) {
  const CoordGrid grid = coord_grid(volume.dims);
  if (grid.in_dim != model.config.in_dim) {
    throw dim_error("evaluate: volume dimensionality does not match model in_dim");
  }
  return eval_full_grid(model, grid, volume).psnr_db;
}

Volume render_to_volume(const SirenModel& model, std::array<std::int64_t, 3> dims, int bit_depth,
                        std::array<double, 3> spacing_mm) {
  const CoordGrid grid = coord_grid(dims);
  if (grid.in_dim != model.config.in_dim) {
    throw dim_error("render_to_volume: dims do not match model in_dim");
  }
  const std::vector<float> raw = siren_forward(model, grid);
  Volume out = make_volume(dims, bit_depth, spacing_mm);
  for (std::size_t i = 0; i < raw.size(); ++i) out.data[i] = std::clamp(raw[i], 0.0f, 1.0f);
  return out;
}

void write_trainlog_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << "iteration,loss,psnr_db,seconds,peak_bytes\n";
  char line[160];
  for (const auto& r : log.records) {
    if (std::isinf(r.psnr_db)) {
      std::snprintf(line, sizeof(line), "%lld,%.9g,inf,%.3f,%lld\n",
                    static_cast<long long>(r.iteration), r.loss, r.wall_clock_s,
                    static_cast<long long>(r.peak_alloc_bytes));
    } else {
      std::snprintf(line, sizeof(line), "%lld,%.9g,%.6f,%.3f,%lld\n",
                    static_cast<long long>(r.iteration), r.loss, r.psnr_db, r.wall_clock_s,
                    static_cast<long long>(r.peak_alloc_bytes));
    }
    out << line;
  }
  if (!out) throw io_error("short write on " + path);
}

}  // namespace inrv
