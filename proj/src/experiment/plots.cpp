#include "a2sbnn/experiment/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/experiment/report.hpp"
#include "a2sbnn/stats/descriptive.hpp"

namespace a2sbnn::experiment {
namespace {

constexpr std::size_t kHistogramBins = 30;

// Anchor colors sampled from the viridis map.
constexpr std::array<std::array<int, 3>, 9> kRamp = {{
    {68, 1, 84},
    {71, 44, 122},
    {59, 81, 139},
    {44, 113, 142},
    {33, 144, 141},
    {39, 173, 129},
    {92, 200, 99},
    {170, 220, 50},
    {253, 231, 37},
}};

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!(out << text)) throw IoError("cannot write " + path.string());
}

void panel(std::ostringstream& os, std::size_t side, const std::vector<double>& values, double lo,
           double hi, double x0, double y0, double cell) {
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double v = values[r * side + c];
      // Row 0 sits at y = 0, drawn at the bottom.
      const double y = y0 + static_cast<double>(side - 1 - r) * cell;
      os << "<rect x=\"" << num(x0 + static_cast<double>(c) * cell) << "\" y=\"" << num(y)
         << "\" width=\"" << num(cell) << "\" height=\"" << num(cell) << "\" fill=\""
         << hex(viridis((v - lo) / span)) << "\"/>\n";
    }
  }
}

}  // namespace

Rgb viridis(double t) {
  if (!(t >= 0.0)) t = 0.0;
  if (t > 1.0) t = 1.0;
  const double pos = t * static_cast<double>(kRamp.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), kRamp.size() - 2);
  const double f = pos - static_cast<double>(i);
  const auto mix = [&](int k) {
    return static_cast<int>(std::lround(kRamp[i][k] + f * (kRamp[i + 1][k] - kRamp[i][k])));
  };
  return {mix(0), mix(1), mix(2)};
}

std::string heatmap_svg(std::size_t side, const std::vector<double>& target,
                        const std::vector<double>& prediction, const std::string& title) {
  if (side == 0 || target.size() != side * side || prediction.size() != side * side) {
    throw ShapeError("heatmap_svg: values do not match a " + std::to_string(side) + "x" +
                     std::to_string(side) + " grid");
  }
  const auto [tmin, tmax] = std::minmax_element(target.begin(), target.end());
  const auto [pmin, pmax] = std::minmax_element(prediction.begin(), prediction.end());
  const double lo = std::min(*tmin, *pmin);
  const double hi = std::max(*tmax, *pmax);

  const double size = 320.0;
  const double cell = size / static_cast<double>(side);
  const double margin = 30.0;
  const double bar = 16.0;
  const double width = 3 * margin + 2 * size + 2 * margin + bar;
  const double height = size + 2 * margin + 20.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(width / 2) << "\" y=\"18\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<g data-scale-min=\"" << lo << "\" data-scale-max=\"" << hi << "\">\n";
  const double y0 = margin + 10.0;
  panel(os, side, target, lo, hi, margin, y0, cell);
  panel(os, side, prediction, lo, hi, 2 * margin + size, y0, cell);
  os << "</g>\n";
  for (int k = 0; k < 2; ++k) {
    os << "<text x=\"" << num(margin + k * (margin + size) + size / 2) << "\" y=\""
       << num(y0 + size + 16) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"12\">" << (k == 0 ? "target" : "prediction") << "</text>\n";
  }
  // Color bar.
  const double bx = 3 * margin + 2 * size;
  const int steps = 64;
  for (int s = 0; s < steps; ++s) {
    const double t = (s + 0.5) / steps;
    os << "<rect x=\"" << num(bx) << "\" y=\"" << num(y0 + size * (1.0 - (s + 1.0) / steps))
       << "\" width=\"" << num(bar) << "\" height=\"" << num(size / steps + 0.5) << "\" fill=\""
       << hex(viridis(t)) << "\"/>\n";
  }
  os << "<text x=\"" << num(bx + bar + 4) << "\" y=\"" << num(y0 + 10)
     << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(hi) << "</text>\n";
  os << "<text x=\"" << num(bx + bar + 4) << "\" y=\"" << num(y0 + size)
     << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(lo) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string histogram_svg(const std::vector<double>& residuals, std::size_t bins,
                          const std::string& title) {
  const stats::Histogram h = stats::histogram(residuals, bins);
  const std::size_t peak = *std::max_element(h.counts.begin(), h.counts.end());

  const double width = 480.0;
  const double height = 320.0;
  const double left = 50.0;
  const double right = 20.0;
  const double top = 30.0;
  const double bottom = 40.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double bar_w = plot_w / static_cast<double>(bins);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(width / 2) << "\" y=\"18\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (std::size_t b = 0; b < bins; ++b) {
    const double hgt = peak ? plot_h * static_cast<double>(h.counts[b]) / peak : 0.0;
    os << "<rect class=\"bin\" data-count=\"" << h.counts[b] << "\" x=\""
       << num(left + static_cast<double>(b) * bar_w) << "\" y=\"" << num(top + plot_h - hgt)
       << "\" width=\"" << num(bar_w) << "\" height=\"" << num(hgt)
       << "\" fill=\"#3b518b\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
     << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(left) << "\" y=\"" << num(top + plot_h + 16)
     << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(h.edges.front()) << "</text>\n";
  os << "<text x=\"" << num(left + plot_w) << "\" y=\"" << num(top + plot_h + 16)
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
     << num(h.edges.back()) << "</text>\n";
  os << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 6)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">residual</text>\n";
  os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + 8)
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << peak
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void render_plots(const ExperimentConfig& cfg, const SweepResult& sweep) {
  for (const auto& cell : sweep.cells) {
    const MetricsReport& r = cell.report;
    const field::TargetField& target = sweep.targets.at(r.seed);
    const std::string tag = "theta_" + theta_tag(r.theta) + "_seed_" + std::to_string(r.seed);
    const std::string label = "theta = " + theta_tag(r.theta) + ", seed " + std::to_string(r.seed);
    write_text(cfg.output_dir / ("heatmap_" + tag + ".svg"),
               heatmap_svg(target.grid.side, target.values, cell.prediction, label));
    write_text(cfg.output_dir / ("residual_hist_" + tag + ".svg"),
               histogram_svg(cell.residuals, kHistogramBins, "residuals, " + label));
  }
}

}  // namespace a2sbnn::experiment
