#include "a2sbnn/stats/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "a2sbnn/errors.hpp"

namespace a2sbnn::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean: empty input");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

namespace {

double centered_sum_sq(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s;
}

}  // namespace

double variance_population(std::span<const double> x) {
  return centered_sum_sq(x) / static_cast<double>(x.size());
}

double stddev_population(std::span<const double> x) { return std::sqrt(variance_population(x)); }

double variance_sample(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance_sample: need at least 2 values");
  return centered_sum_sq(x) / static_cast<double>(x.size() - 1);
}

double excess_kurtosis(std::span<const double> x) {
  const double m = mean(x);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  if (m2 == 0.0) throw DegenerateInputError("excess_kurtosis: constant input");
  return m4 / (m2 * m2) - 3.0;
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
  if (a.size() < 2) throw ShapeError("pearson: need at least 2 values");
  if (is_constant(a) || is_constant(b)) {
    throw DegenerateInputError("pearson: constant input has no correlation");
  }
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("rmse: length mismatch");
  if (a.empty()) throw ShapeError("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

double wasserstein1_exact(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("wasserstein1_exact: length mismatch");
  if (a.empty()) throw ShapeError("wasserstein1_exact: empty input");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += std::abs(sa[i] - sb[i]);
  return s / static_cast<double>(sa.size());
}

Histogram histogram(std::span<const double> x, std::size_t bins) {
  if (x.empty()) throw DomainError("histogram: empty input");
  if (bins == 0) throw DomainError("histogram: bins must be positive");
  auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);

  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : x) {
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

}  // namespace a2sbnn::stats
