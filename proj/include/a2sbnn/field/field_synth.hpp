#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "a2sbnn/stats/matrix.hpp"

namespace a2sbnn::field {

using Point = std::array<double, 2>;

// side x side evenly spaced points on [0,1]^2 including the edges, row-major
// (the first coordinate is the row position, the second the column).
struct SpatialGrid {
  std::size_t side = 0;
  std::vector<Point> coords;

  std::size_t size() const { return coords.size(); }
};

struct FieldConfig {
  double kernel_variance = 1.0;
  double length_scale = 0.2;
  double t_dof = 3.0;
  double noise_scale = 0.05;
  double jitter = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TargetField {
  SpatialGrid grid;
  std::vector<double> values;  // min-max normalized to [0, 1]
};

// Throws DomainError for side < 2.
SpatialGrid make_grid(std::size_t side);

// Squared-exponential kernel C_ij = sigma2 * exp(-|xi - xj|^2 / (2 ell^2)).
stats::Matrix se_covariance(const SpatialGrid& grid, double sigma2, double ell);

// L z + noise_scale * t_nu before normalization. Exposed for diagnostics.
std::vector<double> synthesize_raw(const SpatialGrid& grid, const FieldConfig& cfg);

// Linear rescale to [0, 1]; DegenerateInputError for a constant input.
std::vector<double> min_max_normalize(std::vector<double> values);

// Gaussian-process draw plus Student-t noise, min-max normalized.
TargetField synthesize_target(const SpatialGrid& grid, const FieldConfig& cfg);

// Header row "col_0,...,col_{side-1}" followed by one CSV row per grid row,
// `side` comma-separated values with 17 significant digits.
void write_field_csv(const std::filesystem::path& path, std::size_t side,
                     const std::vector<double>& values);

// Reads the layout written by write_field_csv; returns values row-major and
// sets `side`. Throws IoError / ShapeError.
std::vector<double> read_field_csv(const std::filesystem::path& path, std::size_t& side);

}  // namespace a2sbnn::field
