#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace a2sbnn::stats {

double mean(std::span<const double> x);

// Population (divisor n) variance and standard deviation.
double variance_population(std::span<const double> x);
double stddev_population(std::span<const double> x);

// Sample (divisor n - 1) variance.
double variance_sample(std::span<const double> x);

// Excess kurtosis (population moments). 0 for a Gaussian.
double excess_kurtosis(std::span<const double> x);

bool is_constant(std::span<const double> x);

// Sample Pearson correlation. ShapeError on length mismatch or n < 2,
// DegenerateInputError when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

// sqrt(mean((a - b)^2)). ShapeError on mismatch or empty input.
double rmse(std::span<const double> a, std::span<const double> b);

// Exact empirical 1-D Wasserstein-1 distance between equal-size samples:
// mean |sort(a)_i - sort(b)_i|.
double wasserstein1_exact(std::span<const double> a, std::span<const double> b);

struct Histogram {
  std::vector<double> edges;          // bins + 1 entries
  std::vector<std::size_t> counts;    // bins entries
};

// Equal-width bins over [min, max], right-most bin closed. A zero-width
// range is widened to [v - 0.5, v + 0.5] so all mass lands in one bin.
Histogram histogram(std::span<const double> x, std::size_t bins);

}  // namespace a2sbnn::stats
