#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "a2sbnn/autodiff/ops.hpp"
#include "a2sbnn/stats/rng.hpp"

namespace a2sbnn::testing {

using ScalarFn = std::function<ad::Var(const std::vector<ad::Var>&)>;

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Max relative error between reverse-mode gradients of f and central
// differences with step h, over every entry of every input.
inline double gradcheck(const ScalarFn& f, const std::vector<ad::Tensor>& inputs,
                        double h = 1e-5) {
  std::vector<ad::Var> leaves;
  for (const auto& t : inputs) leaves.push_back(ad::Var::parameter(t));
  const std::vector<ad::Var> analytic = ad::grad(f(leaves), leaves);

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<ad::Var> probe;
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          ad::Tensor t = inputs[j];
          if (j == k) t[i] += delta;
          probe.push_back(ad::Var::constant(std::move(t)));
        }
        return f(probe).item();
      };
      const double numeric = (eval(h) - eval(-h)) / (2.0 * h);
      worst = std::max(worst, relative_error(analytic[k].value()[i], numeric));
    }
  }
  return worst;
}

// Random tensor with entries in [lo, hi], kept at least `gap` away from 0
// so kinked ops are not probed at their kink.
inline ad::Tensor random_tensor(stats::RngStream& rng, ad::Shape shape, double lo = -2.0,
                                double hi = 2.0, double gap = 0.0) {
  ad::Tensor t(shape);
  for (double& v : t.data()) {
    do {
      v = lo + (hi - lo) * rng.uniform();
    } while (std::abs(v) < gap);
  }
  return t;
}

// sum(w * x) with fixed random weights, turning any tensor into a scalar
// whose gradient touches every entry.
inline ad::Var weighted_sum(const ad::Var& x, std::uint64_t seed) {
  stats::RngStream rng(seed, 0xABC);
  return ad::sum(ad::mul(x, ad::Var::constant(random_tensor(rng, x.shape(), 0.5, 1.5))));
}

// Random MLP in -> h -> h -> 1 with tanh-free smooth activations
// (sigmoid, elu). Parameters come first in the returned list, the input last.
struct Mlp {
  std::vector<ad::Tensor> tensors;  // W1, b1, W2, b2, W3, b3, x
  static ad::Var forward(const std::vector<ad::Var>& p) {
    ad::Var h = ad::sigmoid(ad::add(ad::matmul(p[6], p[0], false, true), p[1]));
    h = ad::elu(ad::add(ad::matmul(h, p[2], false, true), p[3]));
    return ad::mean(ad::square(ad::add(ad::matmul(h, p[4], false, true), p[5])));
  }
};

inline Mlp random_mlp(std::uint64_t seed, std::size_t in, std::size_t hidden, std::size_t batch) {
  stats::RngStream rng(seed, 1);
  Mlp m;
  m.tensors = {random_tensor(rng, {hidden, in}, -1, 1),     random_tensor(rng, {1, hidden}, -1, 1),
               random_tensor(rng, {hidden, hidden}, -1, 1), random_tensor(rng, {1, hidden}, -1, 1),
               random_tensor(rng, {1, hidden}, -1, 1),      random_tensor(rng, {1, 1}, -1, 1),
               random_tensor(rng, {batch, in}, -1, 1)};
  return m;
}

// Gradient-penalty composite of a 1 -> H -> H -> 1 leaky-ReLU critic at fixed
// interpolates v: mean((|dD/dv| - 1)^2). Inputs: W1, b1, W2, b2, W3, b3.
inline ad::Var penalty_of(const std::vector<ad::Var>& p, const ad::Tensor& v_values, double slope) {
  ad::Var v = ad::Var::parameter(v_values);
  ad::Var h = ad::leaky_relu(ad::add(ad::matmul(v, p[0], false, true), p[1]), slope);
  h = ad::leaky_relu(ad::add(ad::matmul(h, p[2], false, true), p[3]), slope);
  ad::Var d = ad::add(ad::matmul(h, p[4], false, true), p[5]);
  ad::Var g = ad::grad(ad::sum(d), {v}, /*create_graph=*/true)[0];
  return ad::mean(ad::square(ad::add_scalar(ad::norm2_rows(g, 1e-12), -1.0)));
}

}  // namespace a2sbnn::testing
