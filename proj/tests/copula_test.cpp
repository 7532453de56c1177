#include <gtest/gtest.h>

#include <cmath>

#include "a2sbnn/copula/a2_copula.hpp"
#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/descriptive.hpp"

namespace a2sbnn::copula {
namespace {

const double kGolden = (3.0 - std::sqrt(5.0)) / 2.0;

TEST(InvGeneratorTest, Endpoints) {
  for (double theta : {1.0, 1.5, 2.0, 5.0, 10.0}) {
    EXPECT_NEAR(inv_generator(1.0, theta, 0.0, 1.0), kGolden, 1e-15);
    EXPECT_NEAR(inv_generator(0.0, theta, 0.0, 1.0), 1.0, 1e-15);
  }
  EXPECT_NEAR(inv_generator(0.0, 2.0, 1e-300, 1.0), 1.0, 1e-12);
}

TEST(InvGeneratorTest, HalfAtThetaTwo) {
  const double s = 2.0 + std::sqrt(0.5);
  EXPECT_NEAR(inv_generator(0.5, 2.0), (s - std::sqrt(s * s - 4.0)) / 2.0, 1e-14);
  EXPECT_NEAR(inv_generator(0.5, 2.0), 0.441348, 1e-5);
}

TEST(InvGeneratorTest, DomainErrors) {
  EXPECT_THROW(inv_generator(0.5, 0.99), DomainError);
  EXPECT_THROW(inv_generator(-0.01, 2.0), DomainError);
  EXPECT_THROW(inv_generator(1.01, 2.0), DomainError);
  EXPECT_THROW(inv_generator(std::nan(""), 2.0), DomainError);
}

TEST(InvGeneratorTest, ClampsBeforeEvaluating) {
  EXPECT_EQ(inv_generator(0.0, 3.0), inv_generator(1e-9, 3.0));
  EXPECT_EQ(inv_generator(1.0, 3.0), inv_generator(1.0 - 1e-9, 3.0));
}

TEST(InvGeneratorTest, MonotoneBoundedAndSmallerRoot) {
  const int n = 10000;
  for (double theta : {1.0, 1.5, 2.0, 5.0, 10.0}) {
    double prev = 2.0;
    for (int i = 0; i < n; ++i) {
      const double t = 1e-9 + (1.0 - 2e-9) * i / (n - 1);
      const double v = inv_generator(t, theta);
      ASSERT_LT(v, prev) << "theta=" << theta << " t=" << t;
      ASSERT_GE(v, 0.38196);
      ASSERT_LE(v, 1.0);
      const double s = 2.0 + std::pow(t, 1.0 / theta);
      ASSERT_LE(std::abs(v * v - s * v + 1.0), 1e-10);
      ASSERT_LE(v, s / 2.0);
      prev = v;
    }
  }
}

TEST(A2ParamsTest, Validation) {
  A2Params p;
  EXPECT_NO_THROW(p.validate());
  p.theta = 0.5;
  EXPECT_THROW(p.validate(), DomainError);
  p = A2Params{};
  p.clamp_lo = 0.6;
  p.clamp_hi = 0.4;
  EXPECT_THROW(p.validate(), DomainError);
  p = A2Params{};
  p.clip_epsilon = 0.3;  // bound would vanish
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(A2ParamsTest, ClipBoundDecreasesInTheta) {
  double prev = INFINITY;
  for (double theta = 1.0; theta <= 20.0; theta += 0.5) {
    A2Params p;
    p.theta = theta;
    EXPECT_GT(p.clip_bound(), 0.0);
    EXPECT_LT(p.clip_bound(), prev);
    EXPECT_DOUBLE_EQ(p.weight_limit(), p.clip_bound() - 1e-3);
    prev = p.clip_bound();
  }
}

TEST(InitWeightsTest, BoundAtThetaOne) {
  stats::RngStream r(1, 0);
  A2Params p;
  const auto w = init_weights(r, 128, 64, p);
  ASSERT_EQ(w.rows(), 128u);
  ASSERT_EQ(w.cols(), 64u);
  for (double v : w.values()) ASSERT_LE(std::abs(v), 0.25 - 1e-3);
}

TEST(InitWeightsTest, BoundAtThetaFour) {
  stats::RngStream r(2, 0);
  A2Params p;
  p.theta = 4.0;
  const auto w = init_weights(r, 64, 64, p);
  double peak = 0.0;
  for (double v : w.values()) peak = std::max(peak, std::abs(v));
  EXPECT_LE(peak, 0.125 - 1e-3);
}

TEST(InitWeightsTest, BoundHoldsAcrossThetaAndShapes) {
  for (double theta : {1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}) {
    A2Params p;
    p.theta = theta;
    const double limit = 0.25 / std::sqrt(theta) - 1e-3;
    stats::RngStream r(static_cast<std::uint64_t>(theta * 10), 1);
    for (auto [out, in] : {std::pair{1, 1}, {1, 256}, {256, 1}, {17, 33}, {256, 256}}) {
      const auto w = init_weights(r, out, in, p);
      for (double v : w.values()) ASSERT_LE(std::abs(v), limit) << theta;
    }
  }
}

TEST(InitWeightsTest, Deterministic) {
  A2Params p;
  p.theta = 9.0;
  stats::RngStream a(5, 5), b(5, 5);
  EXPECT_EQ(init_weights(a, 8, 8, p), init_weights(b, 8, 8, p));
}

TEST(InitWeightsTest, MeanIsNearZero) {
  for (double theta : {1.0, 2.0, 10.0}) {
    A2Params p;
    p.theta = theta;
    stats::RngStream r(99, 0);
    const auto w = init_weights(r, 1000, 100, p);
    EXPECT_NEAR(stats::mean(w.values()), 0.0, 0.05) << theta;
  }
}

TEST(InitWeightsTest, NotConstant) {
  A2Params p;
  stats::RngStream r(3, 0);
  EXPECT_FALSE(stats::is_constant(init_weights(r, 4, 4, p).values()));
}

TEST(InitWeightsTest, SingleWeightIsZero) {
  A2Params p;
  stats::RngStream r(3, 0);
  EXPECT_EQ(init_weights(r, 1, 1, p)(0, 0), 0.0);
}

TEST(InitWeightsTest, EmptyShapeRejected) {
  A2Params p;
  stats::RngStream r(3, 0);
  EXPECT_THROW(init_weights(r, 0, 4, p), ShapeError);
  EXPECT_THROW(init_weights(r, 4, 0, p), ShapeError);
}

TEST(InitBiasTest, Zeros) {
  EXPECT_EQ(init_bias(3), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(init_bias(1), (std::vector<double>{0}));
  EXPECT_THROW(init_bias(0), ShapeError);
}

}  // namespace
}  // namespace a2sbnn::copula
