#pragma once

#include <span>

namespace a2sbnn::stats {

struct ShapiroWilkResult {
  double w = 0.0;
  double p = 0.0;
};

// Shapiro-Wilk normality test following Royston's AS R94: polynomial
// approximations for the coefficients and a normalizing transformation of
// W for the p-value. Valid for 3 <= n <= 5000.
//
// Throws DomainError outside that range and DegenerateInputError when all
// values are equal.
ShapiroWilkResult shapiro_wilk(std::span<const double> x);

}  // namespace a2sbnn::stats
