#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "a2sbnn/calibration/calibration.hpp"
#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/descriptive.hpp"
#include "support/gradcheck.hpp"

namespace a2sbnn::calibration {
namespace {

ad::Var col(std::vector<double> v) { return ad::Var::constant(ad::Tensor::column(std::move(v))); }
ad::Var pcol(std::vector<double> v) { return ad::Var::parameter(ad::Tensor::column(std::move(v))); }

// 1 -> 1 -> 1 -> 1 critic that is the identity on [0, 1].
CriticParams identity_critic() {
  CriticParams c;
  c.leaky_slope = 0.2;
  auto p = [](double v) { return ad::Var::parameter(ad::Tensor::scalar(v)); };
  c.layers[0] = {p(1.0), p(5.0)};
  c.layers[1] = {p(1.0), p(0.0)};
  c.layers[2] = {p(1.0), p(-5.0)};
  return c;
}

TEST(LossSupTest, Examples) {
  EXPECT_EQ(loss_sup(col({1, 2}), col({1, 2})).item(), 0.0);
  EXPECT_EQ(loss_sup(col({2, 3}), col({1, 2})).item(), 1.0);
  EXPECT_EQ(loss_sup(col({0, 1}), col({1, 1})).item(), 0.5);
  EXPECT_THROW(loss_sup(col({0, 1}), col({1, 1, 1})), ShapeError);
}

TEST(LossMomentTest, Examples) {
  EXPECT_EQ(loss_moment(col({0, 2}), col({1, 1})).item(), 0.0);
  EXPECT_NEAR(loss_moment(col({0.6, 0.6}), col({0.4, 0.4})).item(), 0.04, 1e-15);
  EXPECT_EQ(loss_moment(col({0.3, 0.9}), col({0.3, 0.9})).item(), 0.0);
  EXPECT_THROW(loss_moment(col({0, 1}), col({1})), ShapeError);
}

TEST(LossMomentTest, VarianceTermIsOptIn) {
  const ad::Var a = col({0, 2});
  const ad::Var b = col({1, 1});
  EXPECT_EQ(loss_moment(a, b, false).item(), 0.0);
  EXPECT_EQ(loss_moment(a, b, true).item(), 1.0);  // var(a) = 1, var(b) = 0
}

TEST(LossCorrTest, Examples) {
  const std::vector<double> t = {0.1, 0.5, 0.2, 0.9};
  EXPECT_NEAR(loss_corr(col(t), col(t)).item(), 0.0, 1e-15);
  std::vector<double> neg(t);
  for (double& v : neg) v = -v;
  EXPECT_NEAR(loss_corr(col(neg), col(t)).item(), 2.0, 1e-15);
}

TEST(LossCorrTest, UncorrelatedNoiseGivesAboutOne) {
  stats::RngStream r(1, 0);
  const auto a = stats::sample_normal(r, 10000);
  const auto b = stats::sample_normal(r, 10000);
  EXPECT_NEAR(loss_corr(col(a), col(b)).item(), 1.0, 0.05);
}

TEST(LossCorrTest, ConstantPredictionIsMaximalWithZeroGradient) {
  ad::Var pred = pcol({0.3, 0.3, 0.3});
  const ad::Var l = loss_corr(pred, col({0.1, 0.2, 0.7}));
  EXPECT_EQ(l.item(), 1.0);
  EXPECT_FALSE(l.requires_grad());
}

TEST(LossCorrTest, Errors) {
  EXPECT_THROW(loss_corr(col({1, 2, 3}), col({1, 1, 1})), DegenerateInputError);
  EXPECT_THROW(loss_corr(col({1, 2}), col({1, 2, 3})), ShapeError);
}

TEST(LossCorrTest, GradientMatchesFiniteDifferences) {
  stats::RngStream r(2, 0);
  const ad::Tensor p = testing::random_tensor(r, {20, 1});
  const ad::Var t = ad::Var::constant(testing::random_tensor(r, {20, 1}));
  const double err = testing::gradcheck(
      [&](const std::vector<ad::Var>& in) { return loss_corr(in[0], t); }, {p});
  EXPECT_LE(err, 1e-4);
}

TEST(CriticTest, ZeroWeightsGiveBias) {
  copula::A2Params a2;
  CriticParams c = init_critic(8, 0.2, a2, 0);
  for (auto& l : c.layers) l.weight.mutable_value() = ad::Tensor(l.weight.shape(), 0.0);
  c.layers[2].bias.mutable_value() = ad::Tensor::scalar(0.7);
  const ad::Var out = critic_forward(col({0.1, 0.5, 3.0}), c);
  ASSERT_EQ(out.shape(), (ad::Shape{3, 1}));
  for (double v : out.value().data()) EXPECT_EQ(v, 0.7);
}

TEST(CriticTest, InitIsCopulaBounded) {
  copula::A2Params a2;
  a2.theta = 9.0;
  const CriticParams c = init_critic(64, 0.2, a2, 3);
  EXPECT_EQ(c.layers[0].weight.shape(), (ad::Shape{64, 1}));
  EXPECT_EQ(c.layers[1].weight.shape(), (ad::Shape{64, 64}));
  EXPECT_EQ(c.layers[2].weight.shape(), (ad::Shape{1, 64}));
  for (const auto& l : c.layers) {
    for (double w : l.weight.value().data()) ASSERT_LE(std::abs(w), a2.weight_limit());
  }
  EXPECT_THROW(critic_forward(ad::Var::constant(ad::Tensor({2, 2})), c), ShapeError);
}

TEST(WassersteinTest, IdenticalBatchesLeaveOnlyThePenalty) {
  copula::A2Params a2;
  const CriticParams c = init_critic(16, 0.2, a2, 1);
  stats::RngStream r(5, 0);
  const ad::Var x = col(stats::sample_uniform(r, 64));
  const WassersteinTerms t = loss_wasserstein_and_gp(x, x, c, r, 10.0);
  EXPECT_EQ(t.estimate, 0.0);
  EXPECT_NEAR(t.critic_loss.item(), 10.0 * t.penalty, 1e-15);
  EXPECT_GT(t.penalty, 0.0);
}

TEST(WassersteinTest, UnitSlopeCriticHasNoPenalty) {
  stats::RngStream r(6, 0);
  const ad::Var a = col(stats::sample_uniform(r, 32));
  const ad::Var b = col(stats::sample_uniform(r, 32));
  const WassersteinTerms t = loss_wasserstein_and_gp(a, b, identity_critic(), r, 10.0);
  EXPECT_NEAR(t.penalty, 0.0, 1e-12);
  EXPECT_NEAR(t.estimate, stats::mean(b.value().data()) - stats::mean(a.value().data()), 1e-12);
  EXPECT_NEAR(t.generator_loss.item(), -stats::mean(a.value().data()), 1e-12);
}

TEST(WassersteinTest, LengthMismatch) {
  stats::RngStream r(6, 0);
  EXPECT_THROW(loss_wasserstein_and_gp(col({1, 2}), col({1, 2, 3}), identity_critic(), r, 10.0),
               ShapeError);
}

TEST(WassersteinTest, GeneratorLossFollowsPredGraph) {
  stats::RngStream r(7, 0);
  ad::Var pred = pcol({0.2, 0.4, 0.6});
  const WassersteinTerms t = loss_wasserstein_and_gp(pred, col({0.1, 0.2, 0.3}), identity_critic(), r, 10.0);
  ad::backward(t.generator_loss);
  const ad::Tensor g_pred = pred.grad();
  for (double g : g_pred.data()) EXPECT_NEAR(g, -1.0 / 3.0, 1e-15);
}

TEST(WassersteinTest, TrainedCriticIsLipschitzAndBoundedByExactDistance) {
  copula::A2Params a2;
  CriticParams c = init_critic(64, 0.2, a2, 2);
  Adam opt(c.trainable(), 1e-4, 0.5, 0.9);
  stats::RngStream data(8, 0);
  std::vector<double> a = stats::sample_uniform(data, 256);
  std::vector<double> b(a);
  for (double& v : b) v += 0.5;
  const ad::Var va = col(a), vb = col(b);
  stats::RngStream interp(8, 1);
  for (int step = 0; step < 500; ++step) {
    opt.zero_grad();
    ad::backward(loss_wasserstein_and_gp(va, vb, c, interp, 10.0).critic_loss);
    opt.step();
  }
  // Held-out pairs from the same two distributions.
  for (std::uint64_t s = 0; s < 5; ++s) {
    stats::RngStream h(100 + s, 0);
    std::vector<double> x = stats::sample_uniform(h, 512);
    std::vector<double> y = stats::sample_uniform(h, 512);
    for (double& v : y) v += 0.5;
    const double est = stats::mean(critic_forward(col(y), c).value().data()) -
                       stats::mean(critic_forward(col(x), c).value().data());
    EXPECT_LE(est, 1.2 * stats::wasserstein1_exact(x, y));
    EXPECT_GT(est, 0.8 * stats::wasserstein1_exact(x, y));
  }
  stats::RngStream pairs(9, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = pairs.uniform(), v = pairs.uniform();
    const double du = critic_forward(col({u}), c).item();
    const double dv = critic_forward(col({v}), c).item();
    ASSERT_LE(std::abs(du - dv), 1.2 * std::abs(u - v) + 1e-12);
  }
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ad::Var w = ad::Var::parameter(ad::Tensor({1, 3}, {1.0, -2.0, 0.5}));
  Adam opt({w}, 0.1, 0.9, 0.999);
  opt.zero_grad();
  ad::backward(ad::sum(ad::square(w)));
  opt.step();
  // Bias-corrected first step is lr * g / (|g| + eps) ~ lr * sign(g).
  EXPECT_NEAR(w.value()[0], 0.9, 1e-7);
  EXPECT_NEAR(w.value()[1], -1.9, 1e-7);
  EXPECT_NEAR(w.value()[2], 0.4, 1e-7);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(AdamTest, ConvergesOnQuadratic) {
  ad::Var w = ad::Var::parameter(ad::Tensor({1, 2}, {3.0, -4.0}));
  Adam opt({w}, 0.05, 0.9, 0.999);
  for (int i = 0; i < 2000; ++i) {
    opt.zero_grad();
    ad::backward(ad::sum(ad::square(ad::add_scalar(w, -1.0))));
    opt.step();
  }
  EXPECT_NEAR(w.value()[0], 1.0, 1e-3);
  EXPECT_NEAR(w.value()[1], 1.0, 1e-3);
}

struct Fixture {
  field::TargetField target;
  model::ModelParams model;
  CriticParams critic;
  CalibrationConfig cfg;
};

Fixture small_setup(std::size_t iterations) {
  Fixture s;
  field::FieldConfig fc;
  fc.seed = 3;
  s.target = field::synthesize_target(field::make_grid(12), fc);
  model::ModelConfig mc;
  mc.embedding = model::EmbeddingConfig::regular(4, 0.3);
  mc.hidden_width = 16;
  copula::A2Params a2;
  a2.theta = 2.0;
  s.model = model::init_model(mc, a2, 1);
  s.critic = init_critic(16, 0.2, a2, 1);
  s.cfg.iterations = iterations;
  s.cfg.batch_size = 64;
  s.cfg.eval_every = 20;
  s.cfg.seed = 11;
  return s;
}

TEST(CompositeLossTest, AdditivityAndLambdaRemoval) {
  Fixture s = small_setup(1);
  const ad::Tensor coords = model::coords_tensor(s.target.grid);
  const ad::Var y = col(s.target.values);

  auto grads_of = [&](const CalibrationConfig& cfg, bool manual) {
    model::ModelParams m = s.model.clone();
    const ad::Var pred = model::forward(coords, m, model::Mode::kTrain);
    ad::Var total;
    if (manual) {
      // Only the terms with non-zero weight, assembled by hand.
      total = loss_sup(pred, y);
      if (cfg.lambda_w > 0) {
        ad::RequiresGradScope frozen(s.critic.trainable(), false);
        total = ad::add(total, ad::scale(ad::neg(ad::mean(critic_forward(pred, s.critic))), cfg.lambda_w));
      }
      if (cfg.lambda_moment > 0) total = ad::add(total, ad::scale(loss_moment(pred, y), cfg.lambda_moment));
      if (cfg.lambda_corr > 0) total = ad::add(total, ad::scale(loss_corr(pred, y), cfg.lambda_corr));
    } else {
      const CompositeLoss l = composite_loss(pred, y, s.critic, cfg);
      const LossBreakdown& p = l.parts;
      EXPECT_NEAR(p.l_total,
                  p.l_sup + cfg.lambda_w * p.l_w + cfg.lambda_moment * p.l_moment +
                      cfg.lambda_corr * p.l_corr,
                  1e-10);
      total = l.total;
    }
    ad::backward(total);
    std::vector<double> g;
    for (const auto& v : m.trainable()) {
      const ad::Tensor t = v.grad();
      g.insert(g.end(), t.data().begin(), t.data().end());
    }
    for (const auto& v : s.critic.trainable()) EXPECT_FALSE(v.has_grad());
    return g;
  };

  for (int zeroed = 0; zeroed < 4; ++zeroed) {
    CalibrationConfig cfg = s.cfg;
    if (zeroed == 1) cfg.lambda_w = 0.0;
    if (zeroed == 2) cfg.lambda_moment = 0.0;
    if (zeroed == 3) cfg.lambda_corr = 0.0;
    EXPECT_EQ(grads_of(cfg, false), grads_of(cfg, true)) << "zeroed term " << zeroed;
  }
  CalibrationConfig a = s.cfg, b = s.cfg;
  b.lambda_moment = 0.0;
  EXPECT_NE(grads_of(a, false), grads_of(b, false));
}

TEST(CalibrateTest, TrajectoryAndProgress) {
  Fixture s = small_setup(120);
  const CalibrationResult r = calibrate(s.target, s.model, s.critic, s.cfg);
  ASSERT_EQ(r.trajectory.size(), 120u);
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    const LossBreakdown& l = r.trajectory[i];
    EXPECT_EQ(l.iteration, i);
    EXPECT_NEAR(l.l_total,
                l.l_sup + s.cfg.lambda_w * l.l_w + s.cfg.lambda_moment * l.l_moment +
                    s.cfg.lambda_corr * l.l_corr,
                1e-10);
  }
  EXPECT_LT(r.trajectory.back().l_sup, r.trajectory.front().l_sup);
  ASSERT_EQ(r.evals.size(), 7u);  // 0, 20, ..., 100 and the final one
  EXPECT_EQ(r.evals.back().iteration, 120u);
  EXPECT_LT(r.evals.back().rmse, r.evals.front().rmse);
}

TEST(CalibrateTest, DeterministicAndLeavesInputsAlone) {
  Fixture s = small_setup(30);
  const auto before = s.model.trainable()[0].value();
  const CalibrationResult a = calibrate(s.target, s.model, s.critic, s.cfg);
  const CalibrationResult b = calibrate(s.target, s.model, s.critic, s.cfg);
  EXPECT_EQ(s.model.trainable()[0].value(), before);
  const auto pa = a.model.trainable(), pb = b.model.trainable();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].value(), pb[i].value());
  for (int l = 0; l < 3; ++l) EXPECT_EQ(a.model.norm[l].running_var, b.model.norm[l].running_var);
  const auto ca = a.critic.trainable(), cb = b.critic.trainable();
  for (std::size_t i = 0; i < ca.size(); ++i) EXPECT_EQ(ca[i].value(), cb[i].value());

  CalibrationConfig other = s.cfg;
  other.seed = 12;
  const CalibrationResult c = calibrate(s.target, s.model, s.critic, other);
  EXPECT_NE(c.model.trainable()[0].value(), pa[0].value());
}

TEST(CalibrateTest, ConfigValidation) {
  Fixture s = small_setup(0);
  EXPECT_THROW(calibrate(s.target, s.model, s.critic, s.cfg), DomainError);
  CalibrationConfig c;
  EXPECT_NO_THROW(c.validate(1024));
  c.batch_size = 1;
  EXPECT_THROW(c.validate(1024), DomainError);
  c.batch_size = 2000;
  EXPECT_THROW(c.validate(1024), DomainError);
  c = CalibrationConfig{};
  c.lambda_corr = -0.1;
  EXPECT_THROW(c.validate(1024), DomainError);
  c = CalibrationConfig{};
  c.critic_steps_per_update = 0;
  EXPECT_THROW(c.validate(1024), DomainError);
  c = CalibrationConfig{};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(1024), DomainError);
}

TEST(CalibrateTest, NonFiniteLossReportsIteration) {
  Fixture s = small_setup(5);
  s.cfg.learning_rate = 1e300;
  try {
    calibrate(s.target, s.model, s.critic, s.cfg);
    FAIL() << "expected a numeric failure";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos) << e.what();
  }
}

TEST(TrajectoryCsvTest, HeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() / "a2sbnn_traj.csv";
  write_trajectory_csv(path, {{0, 1, 2, 3, 4, 5}, {1, 0.5, 0.25, 0.125, 0.0625, 1.0 / 3}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,l_sup,l_w,l_moment,l_corr,l_total");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,2,3,4,5");
  std::getline(in, line);
  EXPECT_EQ(line, "1,0.5,0.25,0.125,0.0625,0.33333333333333331");
  std::filesystem::remove(path);
  EXPECT_THROW(write_trajectory_csv("/nonexistent_dir/t.csv", {}), IoError);
}

}  // namespace
}  // namespace a2sbnn::calibration
