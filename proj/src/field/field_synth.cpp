#include "a2sbnn/field/field_synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/rng.hpp"
#include "a2sbnn/util/csv.hpp"

namespace a2sbnn::field {
namespace {

// Substream ids within a field seed.
constexpr std::uint64_t kGaussianStream = 0xF1E1D001;
constexpr std::uint64_t kNoiseStream = 0xF1E1D002;

}  // namespace

void FieldConfig::validate() const {
  if (!(kernel_variance > 0.0)) throw DomainError("FieldConfig: kernel_variance must be > 0");
  if (!(length_scale > 0.0)) throw DomainError("FieldConfig: length_scale must be > 0");
  if (!(t_dof > 0.0)) throw DomainError("FieldConfig: t_dof must be > 0");
  if (!(noise_scale >= 0.0)) throw DomainError("FieldConfig: noise_scale must be >= 0");
  if (!(jitter >= 0.0)) throw DomainError("FieldConfig: jitter must be >= 0");
}

SpatialGrid make_grid(std::size_t side) {
  if (side < 2) throw DomainError("make_grid: side must be >= 2");
  SpatialGrid grid;
  grid.side = side;
  grid.coords.reserve(side * side);
  const double step = 1.0 / static_cast<double>(side - 1);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      // Multiply then pin the last index so the far edge is exactly 1.
      const double x = r + 1 == side ? 1.0 : static_cast<double>(r) * step;
      const double y = c + 1 == side ? 1.0 : static_cast<double>(c) * step;
      grid.coords.push_back({x, y});
    }
  }
  return grid;
}

stats::Matrix se_covariance(const SpatialGrid& grid, double sigma2, double ell) {
  if (!(sigma2 > 0.0) || !(ell > 0.0)) {
    throw DomainError("se_covariance: sigma2 and length scale must be positive");
  }
  const std::size_t n = grid.size();
  stats::Matrix c(n, n);
  const double inv = 1.0 / (2.0 * ell * ell);
  for (std::size_t i = 0; i < n; ++i) {
    c(i, i) = sigma2;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = grid.coords[i][0] - grid.coords[j][0];
      const double dy = grid.coords[i][1] - grid.coords[j][1];
      const double k = sigma2 * std::exp(-(dx * dx + dy * dy) * inv);
      c(i, j) = k;
      c(j, i) = k;
    }
  }
  return c;
}

std::vector<double> synthesize_raw(const SpatialGrid& grid, const FieldConfig& cfg) {
  cfg.validate();
  const stats::Matrix cov = se_covariance(grid, cfg.kernel_variance, cfg.length_scale);
  const stats::Matrix lower = stats::cholesky(cov, cfg.jitter);

  stats::RngStream gauss(cfg.seed, kGaussianStream);
  const std::vector<double> z = stats::sample_normal(gauss, grid.size());
  std::vector<double> f = stats::multiply(lower, z);

  if (cfg.noise_scale > 0.0) {
    stats::RngStream noise_rng(cfg.seed, kNoiseStream);
    const std::vector<double> t = stats::sample_student_t(noise_rng, cfg.t_dof, grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += cfg.noise_scale * t[i];
  }
  return f;
}

std::vector<double> min_max_normalize(std::vector<double> values) {
  if (values.empty()) throw DomainError("min_max_normalize: empty input");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw DegenerateInputError("min_max_normalize: constant field");
  const double span = hi - lo;
  for (auto& v : values) v = (v - lo) / span;
  // Pin the extremes exactly.
  *lo_it = 0.0;
  *hi_it = 1.0;
  return values;
}

TargetField synthesize_target(const SpatialGrid& grid, const FieldConfig& cfg) {
  TargetField target;
  target.grid = grid;
  target.values = min_max_normalize(synthesize_raw(grid, cfg));
  return target;
}

void write_field_csv(const std::filesystem::path& path, std::size_t side,
                     const std::vector<double>& values) {
  if (side == 0 || values.size() != side * side) {
    throw ShapeError("write_field_csv: values do not form a side x side grid");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < side; ++c) out << (c ? ",col_" : "col_") << c;
  out << '\n';
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      if (c) out << ',';
      out << util::format_double(values[r * side + c]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> read_field_csv(const std::filesystem::path& path, std::size_t& side) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!std::getline(in, line) || line.rfind("col_", 0) != 0) {
    throw IoError(path.string() + " lacks the field header row");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = util::parse_csv_doubles(line);
    if (rows == 0) cols = row.size();
    if (row.size() != cols) throw ShapeError("read_field_csv: ragged rows in " + path.string());
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0 || rows != cols) throw ShapeError("read_field_csv: field is not square");
  side = rows;
  return values;
}

}  // namespace a2sbnn::field
