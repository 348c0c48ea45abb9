#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "inrv/volume.hpp"

namespace inrv {

// Reproduces the with/without pipeline comparison at desk scale: "with" runs
// downsample -> SIREN -> upsample, "without" fits the same SIREN directly on
// the HR grid.
struct BenchPlan {
  std::string dataset = "phantom";  // "phantom" or a .raw path
  std::array<std::int64_t, 3> hr_dims{1, 256, 256};  // phantom dims
  std::array<std::int64_t, 3> lr_dims{1, 64, 64};
  std::vector<int> layers{2, 3, 4};
  std::vector<std::string> pipelines{"with", "without"};
  std::int64_t budget = 2000;  // iterations per cell
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int width = 128;
  int lanczos_a = 3;
  std::int64_t batch_size = 65536;
  double learning_rate = 0.0015;
  std::int64_t eval_interval = 250;
  std::uint64_t phantom_seed = 17;
  std::string upsampler = "lanczos";  // or "nearest"
  std::string out_dir = "bench_out";
};

BenchPlan load_plan(const std::string& path);
BenchPlan plan_from_json_text(const std::string& text);

struct BenchCell {
  std::string pipeline;
  int layers = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double best_psnr_db = 0.0;
  double wall_s = 0.0;
  double per_iter_s = 0.0;
  std::int64_t peak_bytes = 0;
  double compression_rate = 0.0;
};

struct BenchReport {
  BenchPlan plan;
  std::vector<BenchCell> cells;
};

// Deterministic band-limited head-like phantom: nested ellipsoids plus smooth
// random texture, values in [0,1].
Volume make_phantom(std::array<std::int64_t, 3> dims, std::uint64_t seed);

// Executes every (pipeline, layers, seed) cell; failures mark the cell and the
// run continues. Persists per-cell trainlog.csv, checkpoints and PGM snapshots
// under plan.out_dir, plus report.csv and report.md.
BenchReport bench_run(const BenchPlan& plan);

// Stable column order: pipeline,layers,seed,psnr,seconds,peak_bytes,rate.
std::string report_csv(const BenchReport& report);
std::string report_markdown(const BenchReport& report);

}  // namespace inrv
