#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "a2sbnn/experiment/config.hpp"
#include "a2sbnn/experiment/sweep.hpp"

namespace a2sbnn::experiment {

// Aggregate over seeds for one theta.
struct ThetaSummary {
  double theta = 0.0;
  std::size_t runs = 0;
  double correlation_mean = 0.0;
  double correlation_std = 0.0;  // sample standard deviation; 0 for one run
  double correlation_median = 0.0;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double rmse_median = 0.0;
  double shapiro_p_mean = 0.0;
  double shapiro_p_std = 0.0;
  double shapiro_p_median = 0.0;
};

// One entry per distinct theta, in order of first appearance.
std::vector<ThetaSummary> summarize(const std::vector<MetricsReport>& reports);

// Table of theta / correlation / RMSE / Shapiro-Wilk p, with mean and
// standard deviation across seeds when more than one seed ran.
std::string format_summary(const std::vector<MetricsReport>& reports);

std::string theta_tag(double theta);

// Writes metrics.csv, summary.csv, timing.csv, config.json, the per-cell
// field, residual and trajectory CSVs and a checkpoint per cell into
// cfg.output_dir, then prints the summary table to `summary_out`.
// DomainError for an empty sweep.
void write_report(const ExperimentConfig& cfg, const SweepResult& sweep,
                  std::ostream* summary_out = nullptr);

// metrics.csv alone (deterministic; no timing columns).
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& reports);

}  // namespace a2sbnn::experiment
