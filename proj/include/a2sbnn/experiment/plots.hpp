#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "a2sbnn/experiment/config.hpp"
#include "a2sbnn/experiment/sweep.hpp"

namespace a2sbnn::experiment {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
};

// Perceptual ramp from dark purple (0) to yellow (1); t is clamped.
Rgb viridis(double t);

// Target and prediction side by side, one rectangle per grid cell, both
// panels mapped through the same [lo, hi] color range.
std::string heatmap_svg(std::size_t side, const std::vector<double>& target,
                        const std::vector<double>& prediction, const std::string& title);

// Residual histogram with `bins` bars.
std::string histogram_svg(const std::vector<double>& residuals, std::size_t bins,
                          const std::string& title);

// Writes heatmap_theta_<t>_seed_<s>.svg and residual_hist_theta_<t>_seed_<s>.svg
// for every sweep cell into cfg.output_dir.
void render_plots(const ExperimentConfig& cfg, const SweepResult& sweep);

}  // namespace a2sbnn::experiment
