#include "inrv/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "inrv/codec.hpp"
#include "inrv/metrics.hpp"
#include "inrv/resample.hpp"
#include "inrv/rng.hpp"
#include "inrv/trainer.hpp"

namespace inrv {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

struct Ellipsoid {
  std::array<double, 3> center;
  std::array<double, 3> semi_axes;
  double delta;
};

struct Wave {
  std::array<double, 3> freq;
  double amplitude;
  double phase;
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

Volume make_phantom(std::array<std::int64_t, 3> dims, std::uint64_t seed) {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[axis] != 1 && dims[axis] < 32) {
      throw dim_error("make_phantom: dims must be >= 32 per axis (or 1 for 2-D)");
    }
  }
  const bool flat = dims[0] == 1;
  Rng rng(seed);

  // interior structures
  std::vector<Ellipsoid> inner;
  const int inner_count = 4 + static_cast<int>(rng.uniform_int(3));
  for (int i = 0; i < inner_count; ++i) {
    Ellipsoid e;
    e.center = {flat ? 0.0 : rng.uniform(-0.35, 0.35), rng.uniform(-0.4, 0.4),
                rng.uniform(-0.4, 0.4)};
    e.semi_axes = {flat ? 1.0 : rng.uniform(0.1, 0.35), rng.uniform(0.08, 0.3),
                   rng.uniform(0.08, 0.3)};
    e.delta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.12, 0.28);
    inner.push_back(e);
  }

  // smooth texture: random low-frequency waves (cycles per [-1,1] domain)
  std::vector<Wave> waves;
  const int wave_count = 24;
  const double f_max = 12.0;
  for (int i = 0; i < wave_count; ++i) {
    Wave w;
    w.freq = {flat ? 0.0 : rng.uniform(-f_max, f_max), rng.uniform(-f_max, f_max),
              rng.uniform(-f_max, f_max)};
    w.amplitude = rng.uniform(0.01, 0.032);
    w.phase = rng.uniform(0.0, 2.0 * kPi);
    waves.push_back(w);
  }

  const double edge_w = 0.045;  // transition width in ellipse-radius units
  const std::array<double, 3> outer_axes{flat ? 1.0 : 0.85, 0.82, 0.7};
  auto radius = [&](double z, double y, double x, const std::array<double, 3>& c,
                    const std::array<double, 3>& ax) {
    const double dz = flat ? 0.0 : (z - c[0]) / ax[0];
    const double dy = (y - c[1]) / ax[1];
    const double dx = (x - c[2]) / ax[2];
    return std::sqrt(dz * dz + dy * dy + dx * dx);
  };

  Volume v = make_volume(dims);
  auto axis_coord = [](std::int64_t k, std::int64_t n) {
    return n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
  };

  std::size_t p = 0;
  for (std::int64_t zi = 0; zi < dims[0]; ++zi) {
    const double z = axis_coord(zi, dims[0]);
    for (std::int64_t yi = 0; yi < dims[1]; ++yi) {
      const double y = axis_coord(yi, dims[1]);
      for (std::int64_t xi = 0; xi < dims[2]; ++xi) {
        const double x = axis_coord(xi, dims[2]);

        const double rr_outer = radius(z, y, x, {0, 0, 0}, outer_axes);
        const double m_out = smoothstep((1.0 - rr_outer) / edge_w);
        const double m_brain = smoothstep((0.86 - rr_outer) / edge_w);

        double brain = 0.45;
        for (const auto& e : inner) {
          const double rr = radius(z, y, x, e.center, e.semi_axes);
          brain += e.delta * smoothstep((1.0 - rr) / (edge_w * 2.5));
        }
        double tex = 0.0;
        for (const auto& w : waves) {
          tex += w.amplitude *
                 std::sin(kPi * (w.freq[0] * z + w.freq[1] * y + w.freq[2] * x) + w.phase);
        }
        brain += tex;

        const double value = 0.05 * (1.0 - m_out) + 0.85 * (m_out - m_brain) + brain * m_brain;
        v.data[p++] = static_cast<float>(std::clamp(value, 0.01, 0.99));
      }
    }
  }
  return v;
}

BenchPlan plan_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw format_error(std::string("bench plan: ") + e.what());
  }
  static const std::vector<std::string> known{
      "dataset",    "hr_dims",       "lr_dims",       "layers",      "pipelines",
      "budget",     "seeds",         "width",         "lanczos_a",   "batch_size",
      "learning_rate", "eval_interval", "phantom_seed", "upsampler",  "out_dir"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw format_error("bench plan: unknown key '" + key + "'");
    }
  }
  BenchPlan p;
  p.dataset = j.value("dataset", p.dataset);
  auto read_dims = [&](const char* key, std::array<std::int64_t, 3>& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw format_error(std::string("bench plan: ") + key + " must be [d,h,w]");
    out = {a[0].get<std::int64_t>(), a[1].get<std::int64_t>(), a[2].get<std::int64_t>()};
  };
  read_dims("hr_dims", p.hr_dims);
  read_dims("lr_dims", p.lr_dims);
  if (j.contains("layers")) p.layers = j.at("layers").get<std::vector<int>>();
  if (j.contains("pipelines")) p.pipelines = j.at("pipelines").get<std::vector<std::string>>();
  p.budget = j.value("budget", p.budget);
  if (j.contains("seeds")) p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  p.width = j.value("width", p.width);
  p.lanczos_a = j.value("lanczos_a", p.lanczos_a);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.eval_interval = j.value("eval_interval", p.eval_interval);
  p.phantom_seed = j.value("phantom_seed", p.phantom_seed);
  p.upsampler = j.value("upsampler", p.upsampler);
  p.out_dir = j.value("out_dir", p.out_dir);

  if (p.layers.empty() || p.seeds.empty()) throw format_error("bench plan: layers and seeds must be non-empty");
  for (const auto& pl : p.pipelines) {
    if (pl != "with" && pl != "without") throw format_error("bench plan: pipeline must be 'with' or 'without'");
  }
  if (p.upsampler != "lanczos" && p.upsampler != "nearest") {
    throw format_error("bench plan: upsampler must be 'lanczos' or 'nearest'");
  }
  return p;
}

BenchPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open plan " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return plan_from_json_text(text);
}

namespace {

BenchCell run_cell(const BenchPlan& plan, const Volume& hr, const std::string& pipeline, int layers,
                   std::uint64_t seed, const fs::path& cell_dir) {
  BenchCell cell;
  cell.pipeline = pipeline;
  cell.layers = layers;
  cell.seed = seed;

  SirenConfig scfg;
  scfg.hidden_width = plan.width;
  scfg.hidden_layers = layers;
  scfg.seed = seed;

  TrainConfig tcfg;
  tcfg.learning_rate = plan.learning_rate;
  tcfg.batch_size = plan.batch_size;
  tcfg.iterations = plan.budget;
  tcfg.eval_interval = plan.eval_interval;
  tcfg.seed = seed;

  fs::create_directories(cell_dir);
  TrainLog log;
  Volume recon;
  CodecFile file;

  if (pipeline == "with") {
    file = compress(hr, plan.lr_dims, scfg, tcfg, plan.lanczos_a, &log);
    if (plan.upsampler == "nearest") {
      const SirenModel model = codec_to_siren(file);
      const CodecInfo info = parse_header(file);
      recon = upsample_nearest(render_to_volume(model, info.lr_dims, hr.bit_depth, hr.spacing_mm),
                               hr.dims);
    } else {
      recon = decompress(file).volume;
    }
    cell.best_psnr_db = psnr(recon, hr);
  } else {
    scfg.in_dim = hr.is_2d() ? 2 : 3;
    TrainResult result = train_siren(hr, scfg, tcfg);
    log = result.log;
    file = make_siren_codec(result.model, hr.dims, hr.dims, plan.lanczos_a, hr.bit_depth,
                            hr.spacing_mm, tcfg);
    recon = render_to_volume(result.model, hr.dims, hr.bit_depth, hr.spacing_mm);
    cell.best_psnr_db = log.best_psnr_db;
  }

  cell.wall_s = log.records.empty() ? 0.0 : log.records.back().wall_clock_s;
  cell.per_iter_s = plan.budget > 0 ? cell.wall_s / static_cast<double>(plan.budget) : 0.0;
  cell.peak_bytes = log.records.empty() ? 0 : log.records.back().peak_alloc_bytes;
  cell.compression_rate = compression_rate(hr, file);

  write_trainlog_csv(log, (cell_dir / "trainlog.csv").string());
  write_codec_file(file, (cell_dir / "checkpoint.inrv").string());
  save_pgm(recon, recon.depth() / 2, (cell_dir / "recon.pgm").string());
  return cell;
}

}  // namespace

BenchReport bench_run(const BenchPlan& plan) {
  BenchReport report;
  report.plan = plan;

  Volume hr;
  if (plan.dataset == "phantom") {
    hr = make_phantom(plan.hr_dims, plan.phantom_seed);
  } else {
    hr = load_raw(plan.dataset);
    report.plan.hr_dims = hr.dims;
  }

  fs::create_directories(plan.out_dir);
  save_pgm(hr, hr.depth() / 2, (fs::path(plan.out_dir) / "original.pgm").string());

  for (const auto& pipeline : plan.pipelines) {
    for (int layers : plan.layers) {
      for (std::uint64_t seed : plan.seeds) {
        const std::string label =
            pipeline + "_L" + std::to_string(layers) + "_s" + std::to_string(seed);
        const fs::path cell_dir = fs::path(plan.out_dir) / "cells" / label;
        BenchCell cell;
        try {
          cell = run_cell(report.plan, hr, pipeline, layers, seed, cell_dir);
        } catch (const std::exception& e) {
          cell.pipeline = pipeline;
          cell.layers = layers;
          cell.seed = seed;
          cell.failed = true;
          cell.error = e.what();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  {
    std::ofstream out(fs::path(plan.out_dir) / "report.csv");
    out << report_csv(report);
  }
  {
    std::ofstream out(fs::path(plan.out_dir) / "report.md");
    out << report_markdown(report);
  }
  return report;
}

std::string report_csv(const BenchReport& report) {
  std::string out = "pipeline,layers,seed,psnr_db,seconds,peak_bytes,rate,status\n";
  for (const auto& c : report.cells) {
    out += c.pipeline + "," + std::to_string(c.layers) + "," + std::to_string(c.seed) + ",";
    if (c.failed) {
      out += "nan,nan,0,nan,failed: " + c.error + "\n";
      continue;
    }
    out += fmt("%.6f", c.best_psnr_db) + "," + fmt("%.3f", c.wall_s) + "," +
           std::to_string(c.peak_bytes) + "," + fmt("%.6f", c.compression_rate) + ",ok\n";
  }
  return out;
}

namespace {

struct CellMean {
  double psnr = 0.0, wall = 0.0, peak_kb = 0.0;
  int n = 0;
};

}  // namespace

std::string report_markdown(const BenchReport& report) {
  std::string out = "# Bench report\n\n";
  out += "dataset: " + report.plan.dataset + ", hr " + std::to_string(report.plan.hr_dims[1]) +
         "x" + std::to_string(report.plan.hr_dims[2]) + ", lr " +
         std::to_string(report.plan.lr_dims[1]) + "x" + std::to_string(report.plan.lr_dims[2]) +
         ", budget " + std::to_string(report.plan.budget) + " iters\n\n";

  out += "| pipeline | layers | seed | psnr_db | seconds | peak_bytes | rate |\n";
  out += "|---|---|---|---|---|---|---|\n";
  for (const auto& c : report.cells) {
    if (c.failed) {
      out += "| " + c.pipeline + " | " + std::to_string(c.layers) + " | " +
             std::to_string(c.seed) + " | failed | - | - | - |\n";
      continue;
    }
    out += "| " + c.pipeline + " | " + std::to_string(c.layers) + " | " + std::to_string(c.seed) +
           " | " + fmt("%.3f", c.best_psnr_db) + " | " + fmt("%.2f", c.wall_s) + " | " +
           std::to_string(c.peak_bytes) + " | " + fmt("%.3f", c.compression_rate) + " |\n";
  }

  const bool has_with = std::find(report.plan.pipelines.begin(), report.plan.pipelines.end(),
                                  "with") != report.plan.pipelines.end();
  const bool has_without = std::find(report.plan.pipelines.begin(), report.plan.pipelines.end(),
                                     "without") != report.plan.pipelines.end();
  if (!has_with || !has_without) return out;

  auto mean_for = [&](const std::string& pipeline, int layers) {
    CellMean m;
    for (const auto& c : report.cells) {
      if (c.failed || c.pipeline != pipeline || c.layers != layers) continue;
      m.psnr += c.best_psnr_db;
      m.wall += c.wall_s;
      m.peak_kb += static_cast<double>(c.peak_bytes) / 1024.0;
      ++m.n;
    }
    if (m.n > 0) {
      m.psnr /= m.n;
      m.wall /= m.n;
      m.peak_kb /= m.n;
    }
    return m;
  };

  out += "\n## Pipeline comparison (means over seeds)\n\n";
  out += "| Metric | Number of Layers | SIREN direct fit | SIREN with pipeline |\n";
  out += "|---|---|---|---|\n";
  struct MetricRow {
    const char* label;
    double CellMean::*field;
    const char* format;
  };
  const MetricRow rows[] = {{"Best PSNR (dB)", &CellMean::psnr, "%.3f"},
                            {"Training time(s)", &CellMean::wall, "%.2f"},
                            {"Peak memory (KB)", &CellMean::peak_kb, "%.0f"}};
  for (const auto& row : rows) {
    for (int layers : report.plan.layers) {
      const CellMean without = mean_for("without", layers);
      const CellMean with = mean_for("with", layers);
      out += std::string("| ") + row.label + " | " + std::to_string(layers) + " layers | " +
             (without.n ? fmt(row.format, without.*row.field) : "-") + " | " +
             (with.n ? fmt(row.format, with.*row.field) : "-") + " |\n";
    }
  }
  return out;
}

}  // namespace inrv
