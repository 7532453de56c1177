#include "a2sbnn/experiment/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/descriptive.hpp"
#include "a2sbnn/util/csv.hpp"

namespace a2sbnn::experiment {
namespace {

using util::format_double;

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(const std::vector<double>& v) {
  return v.size() > 1 ? std::sqrt(stats::variance_sample(v)) : 0.0;
}

std::string cell_tag(double theta, std::uint64_t seed) {
  return "theta_" + theta_tag(theta) + "_seed_" + std::to_string(seed);
}

}  // namespace

std::string theta_tag(double theta) { return util::format_short(theta); }

std::vector<ThetaSummary> summarize(const std::vector<MetricsReport>& reports) {
  std::vector<double> order;
  for (const auto& r : reports) {
    if (std::find(order.begin(), order.end(), r.theta) == order.end()) order.push_back(r.theta);
  }
  std::vector<ThetaSummary> out;
  for (double theta : order) {
    std::vector<double> corr, rmse, p;
    for (const auto& r : reports) {
      if (r.theta != theta) continue;
      corr.push_back(r.correlation);
      rmse.push_back(r.rmse);
      p.push_back(r.shapiro_p);
    }
    ThetaSummary s;
    s.theta = theta;
    s.runs = corr.size();
    s.correlation_mean = stats::mean(corr);
    s.correlation_std = sample_std(corr);
    s.correlation_median = median_of(corr);
    s.rmse_mean = stats::mean(rmse);
    s.rmse_std = sample_std(rmse);
    s.rmse_median = median_of(rmse);
    s.shapiro_p_mean = stats::mean(p);
    s.shapiro_p_std = sample_std(p);
    s.shapiro_p_median = median_of(p);
    out.push_back(s);
  }
  return out;
}

std::string format_summary(const std::vector<MetricsReport>& reports) {
  const std::vector<ThetaSummary> rows = summarize(reports);
  const bool spread = std::any_of(rows.begin(), rows.end(),
                                  [](const ThetaSummary& s) { return s.runs > 1; });
  std::ostringstream os;
  char buf[160];
  if (spread) {
    std::snprintf(buf, sizeof buf, "%8s  %-19s  %-19s  %-19s  %4s\n", "theta", "correlation",
                  "rmse", "shapiro p", "runs");
  } else {
    std::snprintf(buf, sizeof buf, "%8s  %12s  %12s  %12s\n", "theta", "correlation", "rmse",
                  "shapiro p");
  }
  os << buf;
  for (const auto& s : rows) {
    if (spread) {
      std::snprintf(buf, sizeof buf,
                    "%8s  %.4f +/- %-8.4f  %.4f +/- %-8.4f  %.4f +/- %-8.4f  %4zu\n",
                    theta_tag(s.theta).c_str(), s.correlation_mean, s.correlation_std,
                    s.rmse_mean, s.rmse_std, s.shapiro_p_mean, s.shapiro_p_std, s.runs);
    } else {
      std::snprintf(buf, sizeof buf, "%8s  %12.4f  %12.4f  %12.4f\n", theta_tag(s.theta).c_str(),
                    s.correlation_mean, s.rmse_mean, s.shapiro_p_mean);
    }
    os << buf;
  }
  return os.str();
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsReport>& reports) {
  std::ofstream out = open_csv(path);
  out << "theta,seed,correlation,rmse,shapiro_w,shapiro_p,"
         "final_l_sup,final_l_w,final_l_moment,final_l_corr,final_l_total\n";
  for (const auto& r : reports) {
    const auto& f = r.final_loss;
    out << format_double(r.theta) << ',' << r.seed << ',' << format_double(r.correlation) << ','
        << format_double(r.rmse) << ',' << format_double(r.shapiro_w) << ','
        << format_double(r.shapiro_p) << ',' << format_double(f.l_sup) << ','
        << format_double(f.l_w) << ',' << format_double(f.l_moment) << ','
        << format_double(f.l_corr) << ',' << format_double(f.l_total) << '\n';
  }
  check_written(out, path);
}

void write_report(const ExperimentConfig& cfg, const SweepResult& sweep,
                  std::ostream* summary_out) {
  if (sweep.cells.empty()) throw DomainError("write_report: the sweep has no cells");
  const std::filesystem::path& dir = cfg.output_dir;

  std::vector<MetricsReport> reports;
  for (const auto& c : sweep.cells) reports.push_back(c.report);
  write_metrics_csv(dir / "metrics.csv", reports);

  {
    const auto path = dir / "timing.csv";
    std::ofstream out = open_csv(path);
    out << "theta,seed,runtime_seconds\n";
    for (const auto& r : reports) {
      out << format_double(r.theta) << ',' << r.seed << ',' << format_double(r.runtime_seconds)
          << '\n';
    }
    check_written(out, path);
  }

  {
    const auto path = dir / "summary.csv";
    std::ofstream out = open_csv(path);
    out << "theta,runs,correlation_mean,correlation_std,correlation_median,"
           "rmse_mean,rmse_std,rmse_median,shapiro_p_mean,shapiro_p_std,shapiro_p_median\n";
    for (const auto& s : summarize(reports)) {
      out << format_double(s.theta) << ',' << s.runs << ',' << format_double(s.correlation_mean)
          << ',' << format_double(s.correlation_std) << ','
          << format_double(s.correlation_median) << ',' << format_double(s.rmse_mean) << ','
          << format_double(s.rmse_std) << ',' << format_double(s.rmse_median) << ','
          << format_double(s.shapiro_p_mean) << ',' << format_double(s.shapiro_p_std) << ','
          << format_double(s.shapiro_p_median) << '\n';
    }
    check_written(out, path);
  }

  {
    const auto path = dir / "config.json";
    std::ofstream out(path);
    if (!(out << config_to_json(cfg).dump(2) << '\n')) throw IoError("cannot write " + path.string());
  }

  for (const auto& [seed, target] : sweep.targets) {
    field::write_field_csv(dir / ("field_target_seed_" + std::to_string(seed) + ".csv"),
                           target.grid.side, target.values);
  }

  for (const auto& cell : sweep.cells) {
    const MetricsReport& r = cell.report;
    const field::TargetField& target = sweep.targets.at(r.seed);
    const std::string tag = cell_tag(r.theta, r.seed);
    field::write_field_csv(dir / ("field_pred_" + tag + ".csv"), target.grid.side,
                           cell.prediction);
    calibration::write_trajectory_csv(dir / ("trajectory_" + tag + ".csv"), cell.trajectory);
    model::save_checkpoint(dir / ("model_" + tag + ".ckpt"), cell.model);

    const auto path = dir / ("residuals_" + tag + ".csv");
    std::ofstream out = open_csv(path);
    out << "index,x,y,target,prediction,residual,in_shapiro_sample\n";
    std::vector<bool> in_sample(cell.residuals.size(), false);
    for (std::size_t i : cell.shapiro_indices) in_sample[i] = true;
    for (std::size_t i = 0; i < cell.residuals.size(); ++i) {
      const auto& p = target.grid.coords[i];
      out << i << ',' << format_double(p[0]) << ',' << format_double(p[1]) << ','
          << format_double(target.values[i]) << ',' << format_double(cell.prediction[i]) << ','
          << format_double(cell.residuals[i]) << ',' << (in_sample[i] ? 1 : 0) << '\n';
    }
    check_written(out, path);
  }

  if (summary_out) *summary_out << format_summary(reports);
}

}  // namespace a2sbnn::experiment
