#include "a2sbnn/copula/a2_copula.hpp"

#include <algorithm>
#include <cmath>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/special.hpp"

namespace a2sbnn::copula {

void A2Params::validate() const {
  if (!(theta >= 1.0) || !std::isfinite(theta)) throw DomainError("A2Params: theta must be >= 1");
  if (!(clamp_lo > 0.0 && clamp_lo < clamp_hi && clamp_hi < 1.0)) {
    throw DomainError("A2Params: require 0 < clamp_lo < clamp_hi < 1");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("A2Params: scale must be positive");
  if (!(clip_epsilon >= 0.0) || !(clip_epsilon < clip_bound())) {
    throw DomainError("A2Params: clip_epsilon must lie in [0, B(theta))");
  }
}

double A2Params::clip_bound() const { return 0.25 / std::sqrt(theta); }

double A2Params::weight_limit() const { return clip_bound() - clip_epsilon; }

double inv_generator(double t, double theta, double clamp_lo, double clamp_hi) {
  if (!(theta >= 1.0)) throw DomainError("inv_generator: theta must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("inv_generator: t must lie in [0, 1]");
  t = std::clamp(t, clamp_lo, clamp_hi);
  const double s = 2.0 + std::pow(t, 1.0 / theta);
  // Smaller root of v^2 - s v + 1 = 0, written as 2 / (s + sqrt(s^2 - 4))
  // to avoid cancellation when s is close to 2.
  return 2.0 / (s + std::sqrt(s * s - 4.0));
}

stats::Matrix init_weights(stats::RngStream& rng, std::size_t fan_out, std::size_t fan_in,
                           const A2Params& params) {
  if (fan_out == 0 || fan_in == 0) throw ShapeError("init_weights: empty layer");
  params.validate();

  const std::size_t n = fan_out * fan_in;
  std::vector<double> v(n);

  // Steps 1-2.
  for (auto& x : v) {
    const double t = std::clamp(rng.uniform(), params.clamp_lo, params.clamp_hi);
    x = params.scale * inv_generator(t, params.theta, params.clamp_lo, params.clamp_hi);
  }

  // Step 3: standardize with the tensor's own population moments.
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double x : v) var += (x - mu) * (x - mu);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  // A single draw standardizes to 0; otherwise zero spread is unusable.
  if (!(sd > 0.0) && n > 1) {
    throw NumericError("init_weights: degenerate standardization (zero spread)");
  }

  const double limit = params.weight_limit();
  for (auto& x : v) {
    const double z = sd > 0.0 ? (x - mu) / sd : 0.0;
    // Steps 3-4; the probability is kept inside the step-1 clamp range.
    const double p = std::clamp(stats::logistic(z), params.clamp_lo, params.clamp_hi);
    const double w = stats::inv_normal_cdf(p);
    // Step 5.
    x = std::clamp(w, -limit, limit);
  }
  return stats::Matrix(fan_out, fan_in, std::move(v));
}

std::vector<double> init_bias(std::size_t fan_out) {
  if (fan_out == 0) throw ShapeError("init_bias: empty layer");
  return std::vector<double>(fan_out, 0.0);
}

}  // namespace a2sbnn::copula
