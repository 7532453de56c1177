#include "a2sbnn/stats/shapiro_wilk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/special.hpp"

namespace a2sbnn::stats {
namespace {

template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double r = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
  return r;
}

// Coefficients a_1..a_{n/2} for the upper half of the ordered sample.
std::vector<double> coefficients(std::size_t n) {
  constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};

  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }

  const double an = static_cast<double>(n);
  const double an25 = an + 0.25;
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = inv_normal_cdf((static_cast<double>(i + 1) - 0.375) / an25);
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);

  const double a1 = poly(c1, rsn) - m[0] / ssumm2;
  std::size_t first_generic;
  double fac;
  if (n > 5) {
    const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
    first_generic = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    first_generic = 1;
  }
  a[0] = a1;
  for (std::size_t i = first_generic; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3 || n > 5000) throw DomainError("shapiro_wilk: sample size must be in [3, 5000]");

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double range = sorted.back() - sorted.front();
  if (!(range > 0.0)) throw DegenerateInputError("shapiro_wilk: all values are equal");

  const std::vector<double> half_a = coefficients(n);

  // Full antisymmetric coefficient vector aligned with the ascending sample.
  std::vector<double> a(n, 0.0);
  for (std::size_t i = 0; i < half_a.size(); ++i) {
    a[i] = -half_a[i];
    a[n - 1 - i] = half_a[i];
  }

  // W as the squared correlation between coefficients and scaled sample.
  double mean_a = 0.0;
  double mean_x = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_x += sorted[i] / range;
  }
  mean_a /= static_cast<double>(n);
  mean_x /= static_cast<double>(n);
  double ssa = 0.0;
  double ssx = 0.0;
  double sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double dx = sorted[i] / range - mean_x;
    ssa += da * da;
    ssx += dx * dx;
    sax += da * dx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = std::min(1.0 - w1, 1.0);

  ShapiroWilkResult result;
  result.w = w;

  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;  // 6 / pi
    constexpr double stqr = 1.04719755119660;  // pi / 3
    result.p = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
    return result;
  }

  constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
  constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  constexpr double g[] = {-2.273, 0.459};

  const double an = static_cast<double>(n);
  double y = std::log(1.0 - w);
  double m;
  double s;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) {
      result.p = 1e-99;
      return result;
    }
    y = -std::log(gamma - y);
    m = poly(c3, an);
    s = std::exp(poly(c4, an));
  } else {
    const double xx = std::log(an);
    m = poly(c5, xx);
    s = std::exp(poly(c6, xx));
  }
  result.p = normal_sf((y - m) / s);
  return result;
}

}  // namespace a2sbnn::stats
