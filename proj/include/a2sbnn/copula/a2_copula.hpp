#pragma once

#include <cstddef>
#include <vector>

#include "a2sbnn/stats/matrix.hpp"
#include "a2sbnn/stats/rng.hpp"

namespace a2sbnn::copula {

// Parameters of the A2 copula weight initializer.
struct A2Params {
  double theta = 1.0;         // tail-dependence intensity, >= 1
  double scale = 4.0;         // spread factor applied after the inverse generator
  double clip_epsilon = 1e-3; // shrinks the clip interval
  double clamp_lo = 1e-9;
  double clamp_hi = 1.0 - 1e-9;

  // Throws DomainError when an invariant is violated.
  void validate() const;

  // B(theta) = 0.25 / sqrt(theta).
  double clip_bound() const;

  // Largest admissible |w|: B(theta) - clip_epsilon.
  double weight_limit() const;
};

// Inverse generator of the A2 copula:
//   (2 + t^(1/theta) - sqrt((2 + t^(1/theta))^2 - 4)) / 2.
// t must lie in [0, 1]; it is clamped to [clamp_lo, clamp_hi] before use.
double inv_generator(double t, double theta, double clamp_lo = 1e-9,
                     double clamp_hi = 1.0 - 1e-9);

// Weight matrix (fan_out x fan_in) from the five-step copula pipeline:
// clamped uniforms -> inverse generator * scale -> self-standardize ->
// logistic -> inverse normal CDF -> clamp to +-(B - eps).
stats::Matrix init_weights(stats::RngStream& rng, std::size_t fan_out, std::size_t fan_in,
                           const A2Params& params);

// Zero bias vector; ShapeError when fan_out == 0.
std::vector<double> init_bias(std::size_t fan_out);

}  // namespace a2sbnn::copula
