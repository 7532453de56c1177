#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "a2sbnn/autodiff/ops.hpp"
#include "a2sbnn/errors.hpp"
#include "support/gradcheck.hpp"

namespace a2sbnn::ad {
namespace {

using testing::gradcheck;
using testing::random_tensor;
using testing::weighted_sum;

constexpr double kTol = 1e-4;

Var P(Tensor t) { return Var::parameter(std::move(t)); }
Var C(Tensor t) { return Var::constant(std::move(t)); }

TEST(TensorTest, ShapeContract) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_THROW(t.item(), ShapeError);
  EXPECT_EQ(Tensor::scalar(4).item(), 4.0);
}

TEST(OpsTest, EluValues) {
  const Var x = C(Tensor({1, 4}, {-std::numeric_limits<double>::max(), -1e300, 0.0, 2.5}));
  const Tensor y = elu(x, 1.0).value();
  EXPECT_EQ(y[0], -1.0);
  EXPECT_EQ(y[1], -1.0);
  EXPECT_EQ(y[2], 0.0);
  EXPECT_EQ(y[3], 2.5);
  EXPECT_EQ(elu(C(Tensor::scalar(-1e300)), 0.5).item(), -0.5);
}

TEST(OpsTest, EluRejectsNonFinite) {
  EXPECT_THROW(elu(C(Tensor::scalar(-INFINITY))), NumericError);
  EXPECT_THROW(elu(C(Tensor::scalar(std::nan("")))), NumericError);
}

TEST(OpsTest, SigmoidSlopeAtZero) {
  Var x = P(Tensor::scalar(0.0));
  backward(sigmoid(x));
  EXPECT_DOUBLE_EQ(x.grad().item(), 0.25);
}

TEST(OpsTest, SqrtOfNegativeNamesTheOp) {
  try {
    sqrt(C(Tensor::scalar(-1.0)));
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("sqrt"), std::string::npos);
  }
}

TEST(OpsTest, DivByZero) { EXPECT_THROW(div(C(Tensor::scalar(1)), C(Tensor::scalar(0))), NumericError); }

TEST(OpsTest, ShapeErrors) {
  const Var a = C(Tensor({2, 3}));
  EXPECT_THROW(add(a, C(Tensor({3, 2}))), ShapeError);
  EXPECT_THROW(add(a, C(Tensor({2, 1}))), ShapeError);  // only leading-dimension broadcast
  EXPECT_THROW(matmul(a, a), ShapeError);
  EXPECT_THROW(concat({a, C(Tensor({1, 2}))}, 0), ShapeError);
  EXPECT_THROW(slice(a, 1, 2, 4), ShapeError);
  EXPECT_THROW(broadcast_to(C(Tensor({1, 2})), {3, 3}), ShapeError);
}

TEST(OpsTest, Broadcasting) {
  const Var a = C(Tensor({2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(add(a, C(Tensor({1, 2}, {10, 20}))).value().data(), (std::vector<double>{11, 22, 13, 24}));
  EXPECT_EQ(mul(C(Tensor::scalar(2)), a).value().data(), (std::vector<double>{2, 4, 6, 8}));
}

TEST(OpsTest, ConcatSliceAndPad) {
  const Var a = C(Tensor({2, 2}, {1, 2, 3, 4}));
  const Var b = C(Tensor({2, 1}, {5, 6}));
  const Var c = concat({a, b}, 1);
  EXPECT_EQ(c.value().data(), (std::vector<double>{1, 2, 5, 3, 4, 6}));
  EXPECT_EQ(slice(c, 1, 2, 3).value().data(), (std::vector<double>{5, 6}));
  EXPECT_EQ(slice(concat({a, a}, 0), 0, 1, 3).value().data(), (std::vector<double>{3, 4, 1, 2}));
  EXPECT_EQ(pad(b, 1, 1, 3).value().data(), (std::vector<double>{0, 5, 0, 0, 6, 0}));
}

TEST(BackwardTest, SumGivesOnes) {
  Var w = P(Tensor({3, 4}, 0.7));
  backward(sum(w));
  EXPECT_EQ(w.grad(), Tensor({3, 4}, 1.0));
}

TEST(BackwardTest, QuadraticGradient) {
  stats::RngStream r(1, 0);
  const Tensor wv = random_tensor(r, {4, 5});
  const Tensor cv = random_tensor(r, {4, 5});
  Var w = P(wv);
  backward(mean(square(sub(w, C(cv)))));
  for (std::size_t i = 0; i < wv.size(); ++i) {
    EXPECT_NEAR(w.grad()[i], 2.0 * (wv[i] - cv[i]) / 20.0, 1e-15);
  }
}

TEST(BackwardTest, NonScalarLossRejected) {
  EXPECT_THROW(backward(P(Tensor({2, 1}, 1.0))), ShapeError);
}

TEST(BackwardTest, RepeatedCallsAccumulate) {
  Var w = P(Tensor({2, 2}, 1.0));
  backward(sum(square(w)));
  backward(sum(square(w)));
  EXPECT_EQ(w.grad(), Tensor({2, 2}, 4.0));
  w.zero_grad();
  EXPECT_FALSE(w.has_grad());
}

TEST(BackwardTest, Linearity) {
  stats::RngStream r(2, 0);
  Var w = P(random_tensor(r, {3, 3}));
  auto f = [&] { return sum(exp(scale(w, 0.3))); };
  auto g = [&] { return mean(sigmoid(matmul(w, w))); };
  backward(f());
  const Tensor gf = w.grad();
  w.zero_grad();
  backward(g());
  const Tensor gg = w.grad();
  w.zero_grad();
  backward(add(scale(f(), 2.5), scale(g(), -0.75)));
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(w.grad()[i], 2.5 * gf[i] - 0.75 * gg[i], 1e-12);
  }
}

TEST(BackwardTest, ReplayIsBitIdentical) {
  auto run = [] {
    testing::Mlp m = testing::random_mlp(5, 3, 8, 6);
    std::vector<Var> p;
    for (auto& t : m.tensors) p.push_back(P(t));
    const Var loss = testing::Mlp::forward(p);
    backward(loss);
    std::vector<double> out = {loss.item()};
    for (auto& v : p) {
      const Tensor g = v.grad();
      out.insert(out.end(), g.data().begin(), g.data().end());
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(NoGradTest, GuardDropsHistory) {
  Var w = P(Tensor::scalar(2.0));
  {
    NoGradGuard guard;
    Var y = square(w);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(square(w).requires_grad());
}

TEST(RequiresGradScopeTest, FrozenLeafStaysFrozenForThatGraph) {
  Var w = P(Tensor::scalar(2.0));
  Var x = P(Tensor::scalar(3.0));
  Var y;
  {
    RequiresGradScope freeze({w}, false);
    y = mul(w, x);
  }
  EXPECT_TRUE(w.requires_grad());
  backward(y);
  EXPECT_FALSE(w.has_grad());
  EXPECT_DOUBLE_EQ(x.grad().item(), 2.0);
}

struct UnaryCase {
  const char* name;
  std::function<Var(const Var&)> op;
  double lo, hi, gap;
};

TEST(GradCheckTest, UnaryOps) {
  const std::vector<UnaryCase> cases = {
      {"neg", [](const Var& a) { return neg(a); }, -2, 2, 0},
      {"scale", [](const Var& a) { return scale(a, -1.7); }, -2, 2, 0},
      {"add_scalar", [](const Var& a) { return add_scalar(a, 0.3); }, -2, 2, 0},
      {"sqrt", [](const Var& a) { return sqrt(a); }, 0.2, 3, 0},
      {"square", [](const Var& a) { return square(a); }, -2, 2, 0},
      {"exp", [](const Var& a) { return exp(a); }, -2, 2, 0},
      {"abs", [](const Var& a) { return abs(a); }, -2, 2, 0.05},
      {"sigmoid", [](const Var& a) { return sigmoid(a); }, -4, 4, 0},
      {"elu", [](const Var& a) { return elu(a, 1.0); }, -3, 3, 0.05},
      {"elu_alpha", [](const Var& a) { return elu(a, 0.4); }, -3, 3, 0.05},
      {"elu_grad", [](const Var& a) { return elu_grad(a, 1.0); }, -3, 3, 0.05},
      {"leaky_relu", [](const Var& a) { return leaky_relu(a, 0.2); }, -3, 3, 0.05},
      {"sum", [](const Var& a) { return sum(a); }, -2, 2, 0},
      {"mean", [](const Var& a) { return mean(a); }, -2, 2, 0},
      {"sum_rows", [](const Var& a) { return sum_rows(a); }, -2, 2, 0},
      {"mean_rows", [](const Var& a) { return mean_rows(a); }, -2, 2, 0},
      {"sum_cols", [](const Var& a) { return sum_cols(a); }, -2, 2, 0},
      {"transpose", [](const Var& a) { return transpose(a); }, -2, 2, 0},
      {"norm2", [](const Var& a) { return norm2(a); }, -2, 2, 0.1},
      {"norm2_rows", [](const Var& a) { return norm2_rows(a, 1e-12); }, -2, 2, 0.1},
      {"slice0", [](const Var& a) { return slice(a, 0, 1, 3); }, -2, 2, 0},
      {"slice1", [](const Var& a) { return slice(a, 1, 0, 2); }, -2, 2, 0},
      {"pad", [](const Var& a) { return pad(a, 1, 2, 7); }, -2, 2, 0},
      {"sum_to_row", [](const Var& a) { return sum_to(a, {1, a.shape().cols}); }, -2, 2, 0},
      {"sum_to_col", [](const Var& a) { return sum_to(a, {a.shape().rows, 1}); }, -2, 2, 0},
      {"sum_to_scalar", [](const Var& a) { return sum_to(a, {1, 1}); }, -2, 2, 0},
  };
  std::uint64_t seed = 0;
  for (const auto& c : cases) {
    for (int trial = 0; trial < 4; ++trial) {
      stats::RngStream r(++seed, 7);
      const Shape shape{3 + r.below(3), 3 + r.below(3)};
      const Tensor x = random_tensor(r, shape, c.lo, c.hi, c.gap);
      const double err = gradcheck(
          [&](const std::vector<Var>& in) { return weighted_sum(c.op(in[0]), seed); }, {x});
      EXPECT_LE(err, kTol) << c.name << " trial " << trial;
    }
  }
}

TEST(GradCheckTest, BinaryOps) {
  struct Case {
    const char* name;
    std::function<Var(const Var&, const Var&)> op;
    Shape a, b;
  };
  const auto add_f = [](const Var& a, const Var& b) { return add(a, b); };
  const auto sub_f = [](const Var& a, const Var& b) { return sub(a, b); };
  const auto mul_f = [](const Var& a, const Var& b) { return mul(a, b); };
  const auto div_f = [](const Var& a, const Var& b) { return div(a, b); };
  const std::vector<Case> cases = {
      {"add", add_f, {4, 3}, {4, 3}},     {"add_row", add_f, {4, 3}, {1, 3}},
      {"add_scalar", add_f, {1, 1}, {4, 3}}, {"sub", sub_f, {4, 3}, {4, 3}},
      {"sub_row", sub_f, {1, 3}, {4, 3}},  {"mul", mul_f, {4, 3}, {4, 3}},
      {"mul_row", mul_f, {4, 3}, {1, 3}},  {"mul_scalar", mul_f, {4, 3}, {1, 1}},
      {"div", div_f, {4, 3}, {4, 3}},     {"div_row", div_f, {4, 3}, {1, 3}},
      {"matmul", [](const Var& a, const Var& b) { return matmul(a, b); }, {5, 4}, {4, 3}},
      {"matmul_ta", [](const Var& a, const Var& b) { return matmul(a, b, true, false); }, {4, 5}, {4, 3}},
      {"matmul_tb", [](const Var& a, const Var& b) { return matmul(a, b, false, true); }, {5, 4}, {3, 4}},
      {"matmul_tab", [](const Var& a, const Var& b) { return matmul(a, b, true, true); }, {4, 5}, {3, 4}},
      {"concat0", [](const Var& a, const Var& b) { return concat({a, b}, 0); }, {2, 3}, {4, 3}},
      {"concat1", [](const Var& a, const Var& b) { return concat({a, b}, 1); }, {3, 2}, {3, 4}},
  };
  std::uint64_t seed = 100;
  for (const auto& c : cases) {
    for (int trial = 0; trial < 4; ++trial) {
      stats::RngStream r(++seed, 9);
      const Tensor a = random_tensor(r, c.a, -2, 2, 0.3);
      const Tensor b = random_tensor(r, c.b, -2, 2, 0.3);
      const double err = gradcheck(
          [&](const std::vector<Var>& in) { return weighted_sum(c.op(in[0], in[1]), seed); },
          {a, b});
      EXPECT_LE(err, kTol) << c.name << " trial " << trial;
    }
  }
}

TEST(GradCheckTest, BroadcastTo) {
  stats::RngStream r(3, 3);
  for (Shape s : {Shape{1, 1}, Shape{1, 4}}) {
    const Tensor x = random_tensor(r, s);
    const double err = gradcheck(
        [](const std::vector<Var>& in) { return weighted_sum(broadcast_to(in[0], {5, 4}), 3); },
        {x});
    EXPECT_LE(err, kTol);
  }
}

TEST(GradCheckTest, MatmulAgainstFiniteDifferences) {
  stats::RngStream r(4, 4);
  const Tensor a = random_tensor(r, {5, 4});
  const Tensor b = random_tensor(r, {4, 3});
  const double err = gradcheck(
      [](const std::vector<Var>& in) { return weighted_sum(matmul(in[0], in[1]), 4); }, {a, b});
  EXPECT_LE(err, 1e-6);
}

TEST(GradCheckTest, RandomThreeLayerMlp) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const testing::Mlp m = testing::random_mlp(seed, 3, 6, 5);
    EXPECT_LE(gradcheck(testing::Mlp::forward, m.tensors), kTol) << seed;
  }
}

TEST(GradCheckTest, SecondOrderUnaryOps) {
  // d/dx of sum(d op(x) / dx): exercises every pullback's own pullback.
  const std::vector<UnaryCase> cases = {
      {"sqrt", [](const Var& a) { return sqrt(a); }, 0.3, 3, 0},
      {"square", [](const Var& a) { return square(a); }, -2, 2, 0},
      {"exp", [](const Var& a) { return exp(a); }, -2, 2, 0},
      {"sigmoid", [](const Var& a) { return sigmoid(a); }, -3, 3, 0},
      {"elu", [](const Var& a) { return elu(a); }, -3, 3, 0.05},
      {"norm2_rows", [](const Var& a) { return norm2_rows(a, 1e-12); }, -2, 2, 0.1},
      {"div", [](const Var& a) { return div(C(Tensor::scalar(1.3)), a); }, 0.5, 2, 0},
  };
  std::uint64_t seed = 500;
  for (const auto& c : cases) {
    stats::RngStream r(++seed, 1);
    const Tensor x = random_tensor(r, {3, 4}, c.lo, c.hi, c.gap);
    const double err = gradcheck(
        [&](const std::vector<Var>& in) {
          // Finite-difference probes pass constants; give them a leaf to differentiate.
          const Var x = in[0].requires_grad() ? in[0] : Var::parameter(in[0].value());
          const Var g = grad(weighted_sum(c.op(x), seed), {x}, true)[0];
          return weighted_sum(g, seed + 1);
        },
        {x});
    EXPECT_LE(err, kTol) << c.name;
  }
}

TEST(GradWrtInputTest, QuadraticAndChainThroughParameter) {
  // f = 0.5 |x|^2 with x = theta * u: grad_x f = x, |grad| = |theta| |u|.
  stats::RngStream r(6, 6);
  const Tensor u = random_tensor(r, {4, 1});
  Var theta = P(Tensor::scalar(1.7));
  Var x = mul(theta, C(u));
  Var gx = grad(scale(sum(square(x)), 0.5), {x}, true)[0];
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(gx.value()[i], 1.7 * u[i], 1e-14);
  backward(norm2(gx));
  double unorm = 0.0;
  for (double v : u.data()) unorm += v * v;
  EXPECT_NEAR(theta.grad().item(), std::sqrt(unorm), 1e-12);
}

TEST(GradWrtInputTest, LinearFunctionHasNoPenaltyGradient) {
  // D(x) = c . x + sum(w) with c fixed: grad_x D = c, and the penalty does
  // not depend on the trainable w at all.
  const Var c = C(Tensor({1, 3}, {0.3, -0.4, 1.2}));
  Var w = P(Tensor({1, 2}, {0.5, -0.5}));
  Var x = P(Tensor({1, 3}, {1.0, 2.0, 3.0}));
  Var gx = grad(add(sum(mul(c, x)), sum(w)), {x}, true)[0];
  EXPECT_EQ(gx.value().data(), (std::vector<double>{0.3, -0.4, 1.2}));
  Var penalty = square(add_scalar(norm2(gx), -1.0));
  EXPECT_FALSE(penalty.requires_grad());
  EXPECT_THROW(grad(penalty, {w}), GraphError);
}

TEST(GradWrtInputTest, InputNotInGraph) {
  Var x = P(Tensor::scalar(1.0));
  Var y = P(Tensor::scalar(2.0));
  EXPECT_THROW(grad(square(x), {y}), GraphError);
}

TEST(GradWrtInputTest, PenaltyGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    stats::RngStream r(seed, 77);
    const std::size_t h = 16;
    const std::vector<Tensor> params = {
        random_tensor(r, {h, 1}, -1, 1),  random_tensor(r, {1, h}, -0.5, 0.5),
        random_tensor(r, {h, h}, -0.5, 0.5), random_tensor(r, {1, h}, -0.5, 0.5),
        random_tensor(r, {1, h}, -1, 1),  random_tensor(r, {1, 1}, -1, 1)};
    const Tensor v = random_tensor(r, {12, 1}, 0, 1);
    // The input gradient of a piecewise-linear critic depends on the weights
    // only; the biases merely move kinks, so they are checked separately.
    const auto with_weights = [&](const std::vector<Var>& w) {
      return std::vector<Var>{w[0], C(params[1]), w[1], C(params[3]), w[2], C(params[5])};
    };
    const double err = gradcheck(
        [&](const std::vector<Var>& w) { return testing::penalty_of(with_weights(w), v, 0.2); },
        {params[0], params[2], params[4]}, 1e-6);
    for (std::size_t b : {1u, 3u, 5u}) {
      for (std::size_t i = 0; i < params[b].size(); ++i) {
        auto probe = [&](double d) {
          std::vector<Var> p;
          for (const auto& t : params) p.push_back(C(t));
          Tensor moved = params[b];
          moved[i] += d;
          p[b] = C(moved);
          return testing::penalty_of(p, v, 0.2).item();
        };
        EXPECT_NEAR((probe(1e-6) - probe(-1e-6)) / 2e-6, 0.0, 1e-6);
      }
    }
    EXPECT_LE(err, 1e-3) << seed;
  }
}

}  // namespace
}  // namespace a2sbnn::ad
