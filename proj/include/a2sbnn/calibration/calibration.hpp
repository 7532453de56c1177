#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "a2sbnn/autodiff/ops.hpp"
#include "a2sbnn/copula/a2_copula.hpp"
#include "a2sbnn/field/field_synth.hpp"
#include "a2sbnn/model/sbnn.hpp"
#include "a2sbnn/stats/rng.hpp"

namespace a2sbnn::calibration {

struct CalibrationConfig {
  double lambda_w = 0.1;
  double lambda_moment = 1.0;
  double lambda_corr = 1.0;
  double gp_coefficient = 10.0;
  std::size_t critic_steps_per_update = 5;
  double learning_rate = 1e-3;
  double critic_learning_rate = 1e-4;
  std::size_t iterations = 2000;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;

  std::size_t critic_hidden = 64;
  double critic_leaky_slope = 0.2;
  // Adds (var(pred) - var(target))^2 to the moment term when set.
  bool moment_includes_variance = false;
  // Full-grid evaluation cadence for the eval log; 0 disables it.
  std::size_t eval_every = 100;

  // DomainError on violated invariants; grid_size bounds batch_size.
  void validate(std::size_t grid_size) const;
};

// Scalar-in, scalar-out critic 1 -> H -> H -> 1 with leaky-ReLU hidden units.
struct CriticParams {
  model::LinearLayer layers[3];
  double leaky_slope = 0.2;

  std::vector<ad::Var> trainable() const;
  CriticParams clone() const;
};

// Copula-initialized critic, same pipeline as the main network.
CriticParams init_critic(std::size_t hidden, double leaky_slope, const copula::A2Params& a2,
                         std::uint64_t seed);

struct LossBreakdown {
  std::size_t iteration = 0;
  double l_sup = 0.0;
  double l_w = 0.0;
  double l_moment = 0.0;
  double l_corr = 0.0;
  double l_total = 0.0;
};

struct EvalRecord {
  std::size_t iteration = 0;
  double rmse = 0.0;
  double correlation = 0.0;  // NaN while the prediction is constant
};

// Mean squared error; ShapeError on mismatch.
ad::Var loss_sup(const ad::Var& pred, const ad::Var& target);

// (mean(pred) - mean(target))^2, optionally + (var(pred) - var(target))^2.
ad::Var loss_moment(const ad::Var& pred, const ad::Var& target, bool include_variance = false);

// 1 - pearson(pred, target). A constant prediction yields the maximum
// penalty 1 with zero gradient. DegenerateInputError for constant target.
ad::Var loss_corr(const ad::Var& pred, const ad::Var& target);

// N x 1 values -> N x 1 scores.
ad::Var critic_forward(const ad::Var& values, const CriticParams& critic);

struct WassersteinTerms {
  ad::Var generator_loss;  // -mean(D(pred)), attached to pred's graph
  ad::Var critic_loss;     // mean(D(pred)) - mean(D(target)) + gp * penalty, pred detached
  double estimate = 0.0;   // mean(D(target)) - mean(D(pred))
  double penalty = 0.0;    // mean((|grad D(v)| - 1)^2) before the coefficient
};

// Critic-based Wasserstein terms with gradient penalty on per-element
// interpolates v = u * target + (1 - u) * pred, u ~ U(0, 1).
WassersteinTerms loss_wasserstein_and_gp(const ad::Var& pred, const ad::Var& target,
                                         const CriticParams& critic, stats::RngStream& rng,
                                         double gp_coefficient);

struct CompositeLoss {
  ad::Var total;
  LossBreakdown parts;  // iteration left at 0
};

// l_sup + lambda_w l_w + lambda_moment l_moment + lambda_corr l_corr on one
// batch, with the critic frozen. Terms whose weight is 0 are reported but
// left out of the graph.
CompositeLoss composite_loss(const ad::Var& pred, const ad::Var& target,
                             const CriticParams& critic, const CalibrationConfig& cfg);

// Adam with bias correction over a fixed list of leaves.
class Adam {
 public:
  Adam(std::vector<ad::Var> params, double lr, double beta1, double beta2, double eps = 1e-8);

  void zero_grad();
  void step();
  std::size_t steps() const { return t_; }

 private:
  std::vector<ad::Var> params_;
  std::vector<ad::Tensor> m_;
  std::vector<ad::Tensor> v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
};

struct CalibrationResult {
  model::ModelParams model;
  CriticParams critic;
  std::vector<LossBreakdown> trajectory;  // one entry per iteration
  std::vector<EvalRecord> evals;
};

// Direct calibration against a fixed target field. Each iteration draws a
// batch of grid points without replacement, runs critic_steps_per_update
// critic updates, then one model update on
//   l_sup + lambda_w l_w + lambda_moment l_moment + lambda_corr l_corr.
// The inputs are cloned; the caller's parameters are not modified.
// NumericError (with the iteration index) on a non-finite loss.
CalibrationResult calibrate(const field::TargetField& target, const model::ModelParams& model,
                            const CriticParams& critic, const CalibrationConfig& cfg);

// Full-grid eval-mode predictions.
std::vector<double> predict_field(const field::SpatialGrid& grid, const model::ModelParams& model);

// Header: iteration,l_sup,l_w,l_moment,l_corr,l_total
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<LossBreakdown>& trajectory);

}  // namespace a2sbnn::calibration
