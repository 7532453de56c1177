#include "a2sbnn/calibration/calibration.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/descriptive.hpp"
#include "a2sbnn/util/csv.hpp"

namespace a2sbnn::calibration {
namespace {

constexpr std::uint64_t kCriticInitBase = 0xC2171C00;
constexpr std::uint64_t kBatchStream = 0xBA7C4;
constexpr std::uint64_t kInterpolationStream = 0x1E7E2;

void require_same_shape(const ad::Var& a, const ad::Var& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

ad::Var clone_leaf(const ad::Var& v) { return ad::Var(v.value(), v.requires_grad()); }

}  // namespace

void CalibrationConfig::validate(std::size_t grid_size) const {
  if (!(lambda_w >= 0.0 && lambda_moment >= 0.0 && lambda_corr >= 0.0)) {
    throw DomainError("CalibrationConfig: loss weights must be non-negative");
  }
  if (!(gp_coefficient >= 0.0)) throw DomainError("CalibrationConfig: gp_coefficient must be >= 0");
  if (critic_steps_per_update == 0) {
    throw DomainError("CalibrationConfig: critic_steps_per_update must be positive");
  }
  if (!(learning_rate > 0.0) || !(critic_learning_rate > 0.0)) {
    throw DomainError("CalibrationConfig: learning rates must be positive");
  }
  if (iterations == 0) throw DomainError("CalibrationConfig: iterations must be >= 1");
  if (batch_size < 2 || batch_size > grid_size) {
    throw DomainError("CalibrationConfig: batch_size must lie in [2, grid size]");
  }
  if (critic_hidden == 0) throw DomainError("CalibrationConfig: critic_hidden must be positive");
  if (!(critic_leaky_slope >= 0.0)) throw DomainError("CalibrationConfig: leaky slope must be >= 0");
}

std::vector<ad::Var> CriticParams::trainable() const {
  std::vector<ad::Var> out;
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

CriticParams CriticParams::clone() const {
  CriticParams c;
  c.leaky_slope = leaky_slope;
  for (int i = 0; i < 3; ++i) c.layers[i] = {clone_leaf(layers[i].weight), clone_leaf(layers[i].bias)};
  return c;
}

CriticParams init_critic(std::size_t hidden, double leaky_slope, const copula::A2Params& a2,
                         std::uint64_t seed) {
  if (hidden == 0) throw ShapeError("init_critic: hidden width must be positive");
  CriticParams c;
  c.leaky_slope = leaky_slope;
  const std::size_t fan_out[3] = {hidden, hidden, 1};
  const std::size_t fan_in[3] = {1, hidden, hidden};
  for (int l = 0; l < 3; ++l) {
    stats::RngStream rng(seed, kCriticInitBase + static_cast<std::uint64_t>(l));
    const stats::Matrix w = copula::init_weights(rng, fan_out[l], fan_in[l], a2);
    c.layers[l].weight = ad::Var::parameter(ad::Tensor({w.rows(), w.cols()}, w.values()));
    c.layers[l].bias = ad::Var::parameter(ad::Tensor({1, fan_out[l]}, copula::init_bias(fan_out[l])));
  }
  return c;
}

ad::Var loss_sup(const ad::Var& pred, const ad::Var& target) {
  require_same_shape(pred, target, "loss_sup");
  return ad::mean(ad::square(ad::sub(pred, target)));
}

ad::Var loss_moment(const ad::Var& pred, const ad::Var& target, bool include_variance) {
  require_same_shape(pred, target, "loss_moment");
  const ad::Var mp = ad::mean(pred);
  const ad::Var mt = ad::mean(target);
  ad::Var loss = ad::square(ad::sub(mp, mt));
  if (include_variance) {
    const ad::Var vp = ad::mean(ad::square(ad::sub(pred, mp)));
    const ad::Var vt = ad::mean(ad::square(ad::sub(target, mt)));
    loss = ad::add(loss, ad::square(ad::sub(vp, vt)));
  }
  return loss;
}

ad::Var loss_corr(const ad::Var& pred, const ad::Var& target) {
  require_same_shape(pred, target, "loss_corr");
  if (pred.value().size() < 2) throw ShapeError("loss_corr: need at least 2 values");
  if (stats::is_constant(target.value().data())) {
    throw DegenerateInputError("loss_corr: target is constant");
  }
  if (stats::is_constant(pred.value().data())) return ad::Var::constant(ad::Tensor::scalar(1.0));

  const ad::Var pc = ad::sub(pred, ad::mean(pred));
  const ad::Var tc = ad::sub(target, ad::mean(target));
  const ad::Var cov = ad::sum(ad::mul(pc, tc));
  const ad::Var denom = ad::sqrt(ad::mul(ad::sum(ad::square(pc)), ad::sum(ad::square(tc))));
  return ad::sub(ad::Var::constant(ad::Tensor::scalar(1.0)), ad::div(cov, denom));
}

ad::Var critic_forward(const ad::Var& values, const CriticParams& critic) {
  if (values.shape().cols != 1) throw ShapeError("critic_forward: values must be N x 1");
  const auto linear = [](const ad::Var& x, const model::LinearLayer& l) {
    return ad::add(ad::matmul(x, l.weight, false, true), l.bias);
  };
  const ad::Var h1 = ad::leaky_relu(linear(values, critic.layers[0]), critic.leaky_slope);
  const ad::Var h2 = ad::leaky_relu(linear(h1, critic.layers[1]), critic.leaky_slope);
  return linear(h2, critic.layers[2]);
}

WassersteinTerms loss_wasserstein_and_gp(const ad::Var& pred, const ad::Var& target,
                                         const CriticParams& critic, stats::RngStream& rng,
                                         double gp_coefficient) {
  require_same_shape(pred, target, "loss_wasserstein_and_gp");
  if (pred.shape().cols != 1) throw ShapeError("loss_wasserstein_and_gp: expects N x 1 batches");

  const ad::Var fake = ad::detach(pred);
  const ad::Var real = ad::detach(target);
  const ad::Var d_fake = ad::mean(critic_forward(fake, critic));
  const ad::Var d_real = ad::mean(critic_forward(real, critic));

  WassersteinTerms terms;
  terms.generator_loss =
      pred.requires_grad() ? ad::neg(ad::mean(critic_forward(pred, critic))) : ad::neg(d_fake);

  const std::size_t n = pred.shape().rows;
  ad::Tensor interp({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    interp[i] = u * real.value()[i] + (1.0 - u) * fake.value()[i];
  }
  const ad::Var v = ad::Var::parameter(std::move(interp));
  const ad::Var scores = critic_forward(v, critic);
  const ad::Var grad_v = ad::grad(ad::sum(scores), {v}, /*create_graph=*/true)[0];
  // Tiny floor keeps the norm differentiable when a gradient vanishes.
  const ad::Var deviation = ad::add_scalar(ad::norm2_rows(grad_v, 1e-12), -1.0);
  const ad::Var penalty = ad::mean(ad::square(deviation));

  terms.critic_loss = ad::add(ad::sub(d_fake, d_real), ad::scale(penalty, gp_coefficient));
  terms.estimate = d_real.item() - d_fake.item();
  terms.penalty = penalty.item();
  return terms;
}

Adam::Adam(std::vector<ad::Var> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    if (!p.is_leaf()) throw GraphError("Adam: parameters must be leaves");
    m_.emplace_back(p.shape(), 0.0);
    v_.emplace_back(p.shape(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (!params_[k].has_grad()) continue;
    const ad::Tensor g = params_[k].grad();
    ad::Tensor& w = params_[k].mutable_value();
    ad::Tensor& m = m_[k];
    ad::Tensor& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

std::vector<double> predict_field(const field::SpatialGrid& grid, const model::ModelParams& model) {
  ad::NoGradGuard no_grad;
  return model::forward_eval(model::coords_tensor(grid), model).value().data();
}

CompositeLoss composite_loss(const ad::Var& pred, const ad::Var& target,
                             const CriticParams& critic, const CalibrationConfig& cfg) {
  CompositeLoss out;
  LossBreakdown& lb = out.parts;
  ad::Var total = loss_sup(pred, target);
  lb.l_sup = total.item();
  {
    // The critic is fixed during the model update.
    ad::RequiresGradScope frozen(critic.trainable(), false);
    const ad::Var l_w = ad::neg(ad::mean(critic_forward(pred, critic)));
    lb.l_w = l_w.item();
    if (cfg.lambda_w > 0.0) total = ad::add(total, ad::scale(l_w, cfg.lambda_w));
  }
  const ad::Var l_moment = loss_moment(pred, target, cfg.moment_includes_variance);
  lb.l_moment = l_moment.item();
  if (cfg.lambda_moment > 0.0) total = ad::add(total, ad::scale(l_moment, cfg.lambda_moment));
  const ad::Var l_corr = loss_corr(pred, target);
  lb.l_corr = l_corr.item();
  if (cfg.lambda_corr > 0.0) total = ad::add(total, ad::scale(l_corr, cfg.lambda_corr));
  lb.l_total = total.item();
  out.total = total;
  return out;
}

CalibrationResult calibrate(const field::TargetField& target, const model::ModelParams& model_in,
                            const CriticParams& critic_in, const CalibrationConfig& cfg) {
  const field::SpatialGrid& grid = target.grid;
  if (target.values.size() != grid.size()) {
    throw ShapeError("calibrate: target values do not match the grid");
  }
  cfg.validate(grid.size());
  model_in.validate();

  CalibrationResult result;
  result.model = model_in.clone();
  result.critic = critic_in.clone();
  model::ModelParams& net = result.model;
  CriticParams& critic = result.critic;

  Adam model_opt(net.trainable(), cfg.learning_rate, 0.9, 0.999);
  Adam critic_opt(critic.trainable(), cfg.critic_learning_rate, 0.5, 0.9);

  stats::RngStream batch_rng(cfg.seed, kBatchStream);
  stats::RngStream interp_rng(cfg.seed, kInterpolationStream);

  const auto record_eval = [&](std::size_t iteration) {
    const std::vector<double> pred = predict_field(grid, net);
    EvalRecord rec;
    rec.iteration = iteration;
    rec.rmse = stats::rmse(pred, target.values);
    rec.correlation = stats::is_constant(pred) ? std::numeric_limits<double>::quiet_NaN()
                                               : stats::pearson(pred, target.values);
    result.evals.push_back(rec);
  };

  const auto run_iteration = [&](std::size_t it) {
    const std::vector<std::size_t> idx =
        stats::sample_without_replacement(batch_rng, grid.size(), cfg.batch_size);
    std::vector<double> y(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) y[i] = target.values[idx[i]];
    const ad::Var y_batch = ad::Var::constant(ad::Tensor::column(std::move(y)));

    const ad::Var pred = model::forward(model::coords_tensor(grid, idx), net, model::Mode::kTrain);

    // Critic ascent on the Wasserstein objective (pred treated as data).
    for (std::size_t k = 0; k < cfg.critic_steps_per_update; ++k) {
      critic_opt.zero_grad();
      const WassersteinTerms terms =
          loss_wasserstein_and_gp(ad::detach(pred), y_batch, critic, interp_rng, cfg.gp_coefficient);
      if (!std::isfinite(terms.critic_loss.item())) {
        throw NumericError("calibrate: non-finite critic loss at iteration " + std::to_string(it));
      }
      ad::backward(terms.critic_loss);
      critic_opt.step();
    }

    CompositeLoss loss = composite_loss(pred, y_batch, critic, cfg);
    LossBreakdown& lb = loss.parts;
    lb.iteration = it;
    const ad::Var& total = loss.total;

    if (!std::isfinite(lb.l_total)) {
      throw NumericError("calibrate: non-finite loss at iteration " + std::to_string(it));
    }

    model_opt.zero_grad();
    ad::backward(total);
    model_opt.step();
    result.trajectory.push_back(lb);

    if (cfg.eval_every > 0 && (it % cfg.eval_every == 0)) record_eval(it);
  };

  result.trajectory.reserve(cfg.iterations);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    try {
      run_iteration(it);
    } catch (const NumericError& e) {
      const std::string what = e.what();
      if (what.find("at iteration") != std::string::npos) throw;
      throw NumericError(what + " at iteration " + std::to_string(it));
    }
  }
  if (cfg.eval_every > 0) record_eval(cfg.iterations);
  return result;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<LossBreakdown>& trajectory) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "iteration,l_sup,l_w,l_moment,l_corr,l_total\n";
  for (const auto& lb : trajectory) {
    out << lb.iteration << ',' << util::format_double(lb.l_sup) << ','
        << util::format_double(lb.l_w) << ',' << util::format_double(lb.l_moment) << ','
        << util::format_double(lb.l_corr) << ',' << util::format_double(lb.l_total) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace a2sbnn::calibration
