#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "a2sbnn/calibration/calibration.hpp"
#include "a2sbnn/experiment/config.hpp"
#include "a2sbnn/field/field_synth.hpp"
#include "a2sbnn/model/sbnn.hpp"

namespace a2sbnn::experiment {

// Per-(theta, seed) calibration outcome.
struct MetricsReport {
  double theta = 0.0;
  std::uint64_t seed = 0;
  double correlation = 0.0;
  double rmse = 0.0;
  double shapiro_w = 0.0;
  double shapiro_p = 0.0;
  double runtime_seconds = 0.0;
  calibration::LossBreakdown final_loss;
};

struct CellResult {
  MetricsReport report;
  std::vector<double> prediction;              // full grid, eval mode
  std::vector<double> residuals;               // prediction - target, full grid
  std::vector<std::size_t> shapiro_indices;    // grid points fed to the test
  std::vector<calibration::LossBreakdown> trajectory;
  model::ModelParams model;                    // calibrated network
};

struct SweepResult {
  std::map<std::uint64_t, field::TargetField> targets;  // one per seed
  std::vector<CellResult> cells;                         // seed-major, theta-minor
};

using ProgressCallback = std::function<void(const MetricsReport&)>;

// Calibrates one network per (theta, seed). The target field is synthesized
// once per seed and shared by every theta. Pure function of the config apart
// from the runtime measurements.
SweepResult compute_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

// Grid indices used for the residual normality test of a seed.
std::vector<std::size_t> shapiro_sample_indices(const ExperimentConfig& cfg, std::uint64_t seed);

// Creates the output directory and checks that it is writable; IoError otherwise.
void prepare_output_dir(const std::filesystem::path& dir);

// Validates, prepares the output directory, runs the sweep, writes every
// artifact (and plots when enabled) and returns the reports.
std::vector<MetricsReport> run_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

}  // namespace a2sbnn::experiment
