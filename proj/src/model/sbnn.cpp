#include "a2sbnn/model/sbnn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/rng.hpp"

namespace a2sbnn::model {
namespace {

constexpr std::uint64_t kInitStreamBase = 0x5B11'0000;

ad::Tensor row_of(const std::vector<double>& v) { return ad::Tensor({1, v.size()}, v); }

ad::Tensor to_tensor(const stats::Matrix& m) { return ad::Tensor({m.rows(), m.cols()}, m.values()); }

ad::Var clone_leaf(const ad::Var& v) { return ad::Var(v.value(), v.requires_grad()); }

// Batch normalization on an N x D pre-activation.
ad::Var batch_norm(const ad::Var& x, BatchNormState& bn, Mode mode) {
  const std::size_t n = x.shape().rows;
  if (mode == Mode::kTrain) {
    if (n < 2) throw DegenerateInputError("batch norm in train mode needs a batch of at least 2");
    const ad::Var mu = ad::mean_rows(x);
    const ad::Var centered = ad::sub(x, mu);
    const ad::Var var = ad::mean_rows(ad::square(centered));
    const ad::Var inv_std = ad::div(ad::Var::constant(ad::Tensor(var.shape(), 1.0)),
                                    ad::sqrt(ad::add_scalar(var, bn.eps)));
    const ad::Var normalized = ad::mul(centered, inv_std);

    // Running statistics use the unbiased batch variance.
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < bn.running_mean.size(); ++j) {
      bn.running_mean[j] = (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * mu.value()[j];
      const double updated =
          (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * var.value()[j] * unbias;
      bn.running_var[j] = std::max(updated, bn.eps);
    }
    return ad::add(ad::mul(normalized, bn.gamma), bn.beta);
  }

  ad::Tensor shift = bn.running_mean;
  ad::Tensor inv_std(bn.running_var.shape());
  for (std::size_t j = 0; j < inv_std.size(); ++j) {
    inv_std[j] = 1.0 / std::sqrt(bn.running_var[j] + bn.eps);
  }
  const ad::Var normalized =
      ad::mul(ad::sub(x, ad::Var::constant(std::move(shift))), ad::Var::constant(std::move(inv_std)));
  return ad::add(ad::mul(normalized, bn.gamma), bn.beta);
}

ad::Var linear(const ad::Var& x, const LinearLayer& layer) {
  return ad::add(ad::matmul(x, layer.weight, false, true), layer.bias);
}

ad::Var hidden_block(const ad::Var& x, const LinearLayer& layer, BatchNormState& bn, double alpha,
                     Mode mode) {
  return ad::elu(batch_norm(linear(x, layer), bn, mode), alpha);
}

}  // namespace

void EmbeddingConfig::validate() const {
  if (centers.empty()) throw DomainError("EmbeddingConfig: need at least one center");
  if (!(tau > 0.0)) throw DomainError("EmbeddingConfig: tau must be positive");
  for (const auto& c : centers) {
    if (c[0] < 0.0 || c[0] > 1.0 || c[1] < 0.0 || c[1] > 1.0) {
      throw DomainError("EmbeddingConfig: centers must lie in the unit square");
    }
  }
}

EmbeddingConfig EmbeddingConfig::regular(std::size_t per_side, double tau) {
  EmbeddingConfig cfg;
  cfg.tau = tau;
  if (per_side == 1) {
    cfg.centers.push_back({0.5, 0.5});
    return cfg;
  }
  cfg.centers = field::make_grid(per_side).coords;
  return cfg;
}

ad::Tensor embed(const ad::Tensor& coords, const EmbeddingConfig& cfg) {
  if (coords.cols() != 2) throw ShapeError("embed: coordinates must be N x 2");
  const std::size_t k = cfg.size();
  ad::Tensor out({coords.rows(), k});
  const double inv_tau2 = 1.0 / (cfg.tau * cfg.tau);
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double dx = coords(i, 0) - cfg.centers[j][0];
      const double dy = coords(i, 1) - cfg.centers[j][1];
      out(i, j) = std::exp(-(dx * dx + dy * dy) * inv_tau2);
    }
  }
  return out;
}

ad::Tensor coords_tensor(const field::SpatialGrid& grid) {
  ad::Tensor out({grid.size(), 2});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out(i, 0) = grid.coords[i][0];
    out(i, 1) = grid.coords[i][1];
  }
  return out;
}

ad::Tensor coords_tensor(const field::SpatialGrid& grid, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw ShapeError("coords_tensor: empty selection");
  ad::Tensor out({rows.size(), 2});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& p = grid.coords.at(rows[i]);
    out(i, 0) = p[0];
    out(i, 1) = p[1];
  }
  return out;
}

void ModelConfig::validate() const {
  embedding.validate();
  if (hidden_width == 0) throw DomainError("ModelConfig: hidden_width must be positive");
  if (!(elu_alpha > 0.0)) throw DomainError("ModelConfig: elu_alpha must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) {
    throw DomainError("ModelConfig: bn_momentum must lie in (0, 1)");
  }
  if (!(bn_eps > 0.0)) throw DomainError("ModelConfig: bn_eps must be positive");
}

std::vector<ad::Var> ModelParams::trainable() const {
  std::vector<ad::Var> out;
  for (int l = 0; l < 3; ++l) {
    out.push_back(hidden[l].weight);
    out.push_back(hidden[l].bias);
    out.push_back(norm[l].gamma);
    out.push_back(norm[l].beta);
  }
  out.push_back(output.weight);
  out.push_back(output.bias);
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams c;
  c.embedding = embedding;
  c.elu_alpha = elu_alpha;
  for (int l = 0; l < 3; ++l) {
    c.hidden[l] = {clone_leaf(hidden[l].weight), clone_leaf(hidden[l].bias)};
    c.norm[l] = norm[l];
    c.norm[l].gamma = clone_leaf(norm[l].gamma);
    c.norm[l].beta = clone_leaf(norm[l].beta);
  }
  c.output = {clone_leaf(output.weight), clone_leaf(output.bias)};
  return c;
}

void ModelParams::validate() const {
  embedding.validate();
  const std::size_t d1 = hidden_width();
  const std::size_t k = embedding_width();
  const auto expect = [](const ad::Var& v, ad::Shape s, const char* what) {
    if (!v.defined() || v.shape() != s) {
      throw ShapeError(std::string("ModelParams: ") + what + " must have shape " + s.str());
    }
  };
  expect(hidden[0].weight, {d1, k}, "W1");
  expect(hidden[1].weight, {d1, d1}, "W2");
  expect(hidden[2].weight, {d1, d1}, "W3");
  for (int l = 0; l < 3; ++l) {
    expect(hidden[l].bias, {1, d1}, "hidden bias");
    expect(norm[l].gamma, {1, d1}, "gamma");
    expect(norm[l].beta, {1, d1}, "beta");
    if (norm[l].running_mean.shape() != ad::Shape{1, d1} ||
        norm[l].running_var.shape() != ad::Shape{1, d1}) {
      throw ShapeError("ModelParams: running statistics must be 1 x D1");
    }
    for (double v : norm[l].running_var.data()) {
      if (!(v > 0.0)) throw DomainError("ModelParams: running variance must be positive");
    }
  }
  expect(output.weight, {1, d1 + k}, "W_out");
  expect(output.bias, {1, 1}, "b_out");
}

ModelParams init_model(const ModelConfig& cfg, const copula::A2Params& a2, std::uint64_t seed) {
  cfg.validate();
  a2.validate();
  const std::size_t d1 = cfg.hidden_width;
  const std::size_t k = cfg.embedding.size();

  ModelParams p;
  p.embedding = cfg.embedding;
  p.elu_alpha = cfg.elu_alpha;

  const std::size_t fan_in[3] = {k, d1, d1};
  for (int l = 0; l < 3; ++l) {
    stats::RngStream rng(seed, kInitStreamBase + static_cast<std::uint64_t>(l));
    p.hidden[l].weight = ad::Var::parameter(to_tensor(copula::init_weights(rng, d1, fan_in[l], a2)));
    p.hidden[l].bias = ad::Var::parameter(row_of(copula::init_bias(d1)));
    p.norm[l].gamma = ad::Var::parameter(ad::Tensor({1, d1}, 1.0));
    p.norm[l].beta = ad::Var::parameter(ad::Tensor({1, d1}, 0.0));
    p.norm[l].running_mean = ad::Tensor({1, d1}, 0.0);
    p.norm[l].running_var = ad::Tensor({1, d1}, 1.0);
    p.norm[l].momentum = cfg.bn_momentum;
    p.norm[l].eps = cfg.bn_eps;
  }
  stats::RngStream rng(seed, kInitStreamBase + 3);
  p.output.weight = ad::Var::parameter(to_tensor(copula::init_weights(rng, 1, d1 + k, a2)));
  p.output.bias = ad::Var::parameter(row_of(copula::init_bias(1)));
  return p;
}

ForwardTrace forward_trace(const ad::Tensor& coords, ModelParams& params, Mode mode) {
  ForwardTrace t;
  t.phi = ad::Var::constant(embed(coords, params.embedding));
  const double alpha = params.elu_alpha;
  t.h1 = hidden_block(t.phi, params.hidden[0], params.norm[0], alpha, mode);
  t.h2 = ad::add(hidden_block(t.h1, params.hidden[1], params.norm[1], alpha, mode), t.h1);
  t.h3 = hidden_block(t.h2, params.hidden[2], params.norm[2], alpha, mode);
  t.y = linear(ad::concat({t.h3, t.phi}, 1), params.output);
  return t;
}

ad::Var forward(const ad::Tensor& coords, ModelParams& params, Mode mode) {
  return forward_trace(coords, params, mode).y;
}

ad::Var forward_eval(const ad::Tensor& coords, const ModelParams& params) {
  // Eval mode never touches the batch-norm state, so the cast is safe.
  return forward(coords, const_cast<ModelParams&>(params), Mode::kEval);
}

EnsemblePrediction predict_ensemble(const ad::Tensor& coords,
                                    const std::vector<ModelParams>& replicas) {
  if (replicas.size() < 2) throw DomainError("predict_ensemble: need at least 2 replicas");
  const std::size_t n = coords.rows();
  EnsemblePrediction out;
  out.mean.assign(n, 0.0);
  out.stddev.assign(n, 0.0);
  std::vector<std::vector<double>> preds;
  {
    ad::NoGradGuard no_grad;
    for (const auto& r : replicas) preds.push_back(forward_eval(coords, r).value().data());
  }
  const double m = static_cast<double>(replicas.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& p : preds) s += p[i];
    const double mu = s / m;
    double ss = 0.0;
    for (const auto& p : preds) ss += (p[i] - mu) * (p[i] - mu);
    out.mean[i] = mu;
    out.stddev[i] = std::sqrt(ss / m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'A', '2', 'S', 'B', 'N', 'N', 'v', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void tensor(const ad::Tensor& t) {
    u64(t.rows());
    u64(t.cols());
    bytes(t.data().data(), t.size() * sizeof(double));
  }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("truncated checkpoint " + path_.string());
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }
  ad::Tensor tensor(ad::Shape expected) {
    const std::uint64_t r = u64();
    const std::uint64_t c = u64();
    if (r != expected.rows || c != expected.cols) {
      throw ShapeError("checkpoint tensor has shape (" + std::to_string(r) + "x" +
                       std::to_string(c) + "), expected " + expected.str());
    }
    ad::Tensor t(expected);
    bytes(t.data().data(), t.size() * sizeof(double));
    return t;
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  params.validate();
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u64(params.hidden_width());
  w.u64(params.embedding_width());
  w.f64(params.embedding.tau);
  w.f64(params.elu_alpha);
  for (const auto& c : params.embedding.centers) {
    w.f64(c[0]);
    w.f64(c[1]);
  }
  for (int l = 0; l < 3; ++l) {
    w.f64(params.norm[l].momentum);
    w.f64(params.norm[l].eps);
    w.tensor(params.hidden[l].weight.value());
    w.tensor(params.hidden[l].bias.value());
    w.tensor(params.norm[l].gamma.value());
    w.tensor(params.norm[l].beta.value());
    w.tensor(params.norm[l].running_mean);
    w.tensor(params.norm[l].running_var);
  }
  w.tensor(params.output.weight.value());
  w.tensor(params.output.bias.value());
  w.finish();
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError(path.string() + " is not an A2SBNN checkpoint");
  }
  const std::size_t d1 = r.u64();
  const std::size_t k = r.u64();
  if (d1 == 0 || k == 0 || d1 > (1u << 20) || k > (1u << 20)) {
    throw ShapeError("checkpoint header has implausible widths");
  }
  ModelParams p;
  p.embedding.tau = r.f64();
  p.elu_alpha = r.f64();
  p.embedding.centers.resize(k);
  for (auto& c : p.embedding.centers) {
    c[0] = r.f64();
    c[1] = r.f64();
  }
  const std::size_t fan_in[3] = {k, d1, d1};
  for (int l = 0; l < 3; ++l) {
    p.norm[l].momentum = r.f64();
    p.norm[l].eps = r.f64();
    p.hidden[l].weight = ad::Var::parameter(r.tensor({d1, fan_in[l]}));
    p.hidden[l].bias = ad::Var::parameter(r.tensor({1, d1}));
    p.norm[l].gamma = ad::Var::parameter(r.tensor({1, d1}));
    p.norm[l].beta = ad::Var::parameter(r.tensor({1, d1}));
    p.norm[l].running_mean = r.tensor({1, d1});
    p.norm[l].running_var = r.tensor({1, d1});
  }
  p.output.weight = ad::Var::parameter(r.tensor({1, d1 + k}));
  p.output.bias = ad::Var::parameter(r.tensor({1, 1}));
  p.validate();
  return p;
}

}  // namespace a2sbnn::model
