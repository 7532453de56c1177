#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "a2sbnn/autodiff/ops.hpp"
#include "a2sbnn/copula/a2_copula.hpp"
#include "a2sbnn/field/field_synth.hpp"

namespace a2sbnn::model {

// Gaussian RBF embedding phi_k(x) = exp(-|x - c_k|^2 / tau^2).
struct EmbeddingConfig {
  std::vector<field::Point> centers;
  double tau = 0.3;

  std::size_t size() const { return centers.size(); }
  void validate() const;

  // per_side x per_side centers evenly spaced over [0,1]^2 (edges included).
  static EmbeddingConfig regular(std::size_t per_side, double tau);
};

// Batch of N points (N x 2) -> N x K features.
ad::Tensor embed(const ad::Tensor& coords, const EmbeddingConfig& cfg);

// Coordinates of a grid (or a subset of it, by index) as an N x 2 tensor.
ad::Tensor coords_tensor(const field::SpatialGrid& grid);
ad::Tensor coords_tensor(const field::SpatialGrid& grid, const std::vector<std::size_t>& rows);

struct LinearLayer {
  ad::Var weight;  // fan_out x fan_in
  ad::Var bias;    // 1 x fan_out
};

struct BatchNormState {
  ad::Var gamma;             // 1 x D
  ad::Var beta;              // 1 x D
  ad::Tensor running_mean;   // 1 x D
  ad::Tensor running_var;    // 1 x D
  double momentum = 0.1;
  double eps = 1e-5;
};

struct ModelConfig {
  EmbeddingConfig embedding = EmbeddingConfig::regular(8, 0.3);
  std::size_t hidden_width = 64;
  double elu_alpha = 1.0;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  void validate() const;
};

// Trainable state and batch-norm statistics of the network
//   h1 = ELU(BN(W1 phi + b1))
//   h2 = ELU(BN(W2 h1 + b2)) + h1
//   h3 = ELU(BN(W3 h2 + b3))
//   y  = W_out [h3; phi] + b_out
struct ModelParams {
  EmbeddingConfig embedding;
  double elu_alpha = 1.0;
  LinearLayer hidden[3];
  BatchNormState norm[3];
  LinearLayer output;  // 1 x (D1 + K)

  std::size_t hidden_width() const { return hidden[0].weight.shape().rows; }
  std::size_t embedding_width() const { return embedding.size(); }

  // All leaves updated by the optimizer, in a fixed order.
  std::vector<ad::Var> trainable() const;

  // Deep copy; the copy shares no graph nodes with the original.
  ModelParams clone() const;

  // ShapeError / DomainError on violated invariants.
  void validate() const;
};

enum class Mode { kTrain, kEval };

// Copula-initialized weights (one substream per layer), zero biases,
// gamma = 1, beta = 0, running mean 0 and variance 1.
ModelParams init_model(const ModelConfig& cfg, const copula::A2Params& a2, std::uint64_t seed);

// Train mode normalizes with batch statistics (needs N >= 2) and updates
// the running statistics; eval mode uses the running statistics and leaves
// the parameters untouched.
ad::Var forward(const ad::Tensor& coords, ModelParams& params, Mode mode);
ad::Var forward_eval(const ad::Tensor& coords, const ModelParams& params);

// Intermediate activations of one forward pass.
struct ForwardTrace {
  ad::Var phi;
  ad::Var h1;
  ad::Var h2;
  ad::Var h3;
  ad::Var y;
};

ForwardTrace forward_trace(const ad::Tensor& coords, ModelParams& params, Mode mode);

struct EnsemblePrediction {
  std::vector<double> mean;
  std::vector<double> stddev;  // population convention
};

// Eval-mode forward of every replica; DomainError for fewer than 2.
EnsemblePrediction predict_ensemble(const ad::Tensor& coords,
                                    const std::vector<ModelParams>& replicas);

// Binary checkpoint (see README for the layout).
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace a2sbnn::model
