#pragma once

namespace a2sbnn::stats {

// Standard normal CDF.
double normal_cdf(double x);

// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);

// Inverse standard normal CDF, |error| <= 1e-9 on (0, 1).
// Throws DomainError unless 0 < p < 1.
double inv_normal_cdf(double p);

// Logistic sigmoid 1 / (1 + exp(-x)), stable for large |x|.
double logistic(double x);

}  // namespace a2sbnn::stats
