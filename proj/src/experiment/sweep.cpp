#include "a2sbnn/experiment/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/experiment/plots.hpp"
#include "a2sbnn/experiment/report.hpp"
#include "a2sbnn/stats/descriptive.hpp"
#include "a2sbnn/stats/shapiro_wilk.hpp"

namespace a2sbnn::experiment {
namespace {

constexpr std::uint64_t kShapiroStream = 0x5A1E;

struct CellTask {
  double theta;
  std::uint64_t seed;
};

CellResult run_cell(const ExperimentConfig& cfg, const field::TargetField& target,
                    const CellTask& task) {
  const auto start = std::chrono::steady_clock::now();

  copula::A2Params a2 = cfg.copula;
  a2.theta = task.theta;
  const model::ModelParams init = model::init_model(cfg.model_config(), a2, task.seed);
  const calibration::CriticParams critic = calibration::init_critic(
      cfg.calibration.critic_hidden, cfg.calibration.critic_leaky_slope, a2, task.seed);

  calibration::CalibrationConfig cal = cfg.calibration;
  cal.seed = task.seed;
  calibration::CalibrationResult fit = calibration::calibrate(target, init, critic, cal);

  CellResult cell;
  cell.prediction = calibration::predict_field(target.grid, fit.model);
  cell.residuals.resize(cell.prediction.size());
  for (std::size_t i = 0; i < cell.prediction.size(); ++i) {
    cell.residuals[i] = cell.prediction[i] - target.values[i];
  }
  cell.shapiro_indices = shapiro_sample_indices(cfg, task.seed);
  std::vector<double> sample;
  sample.reserve(cell.shapiro_indices.size());
  for (std::size_t i : cell.shapiro_indices) sample.push_back(cell.residuals[i]);

  MetricsReport& r = cell.report;
  r.theta = task.theta;
  r.seed = task.seed;
  r.correlation = stats::pearson(cell.prediction, target.values);
  r.rmse = stats::rmse(cell.prediction, target.values);
  const stats::ShapiroWilkResult sw = stats::shapiro_wilk(sample);
  r.shapiro_w = sw.w;
  r.shapiro_p = sw.p;
  r.final_loss = fit.trajectory.back();
  cell.trajectory = std::move(fit.trajectory);
  cell.model = std::move(fit.model);
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

}  // namespace

std::vector<std::size_t> shapiro_sample_indices(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::size_t n = cfg.grid_size * cfg.grid_size;
  if (cfg.shapiro_full_grid) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  stats::RngStream rng(seed, kShapiroStream);
  std::vector<std::size_t> idx = stats::sample_without_replacement(rng, n, cfg.shapiro_subsample);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SweepResult compute_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  SweepResult result;
  const field::SpatialGrid grid = field::make_grid(cfg.grid_size);
  for (std::uint64_t seed : cfg.seeds) {
    field::FieldConfig fc = cfg.field;
    fc.seed = seed;
    result.targets.emplace(seed, field::synthesize_target(grid, fc));
  }

  std::vector<CellTask> tasks;
  for (std::uint64_t seed : cfg.seeds) {
    for (double theta : cfg.theta_grid) tasks.push_back({theta, seed});
  }
  result.cells.resize(tasks.size());

  std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, tasks.size());

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        result.cells[i] = run_cell(cfg, result.targets.at(tasks[i].seed), tasks[i]);
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(result.cells[i].report);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  const std::filesystem::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw IoError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

std::vector<MetricsReport> run_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  prepare_output_dir(cfg.output_dir);
  const SweepResult sweep = compute_sweep(cfg, progress);
  write_report(cfg, sweep);
  if (cfg.emit_plots) render_plots(cfg, sweep);
  std::vector<MetricsReport> reports;
  for (const auto& c : sweep.cells) reports.push_back(c.report);
  return reports;
}

}  // namespace a2sbnn::experiment
