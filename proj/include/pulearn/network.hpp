#pragma once

// Small rectifier MLP with a logistic output unit, hand-written backward pass,
// momentum SGD, exponential learning-rate decay and the EMA teacher update.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pulearn/losses.hpp"

namespace pulearn {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Layers chain (out_i == in_{i+1}) and the last layer has a single output.
/// Hidden layers use ReLU, the output layer a logistic sigmoid.
struct ScorerParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().weight.cols()); }
  std::size_t parameter_count() const;
};

/// Throws InvalidInput if the layer shapes do not form a valid scorer.
void check_architecture(const ScorerParams& params);
bool same_architecture(const ScorerParams& a, const ScorerParams& b);

using ParamGrads = std::vector<DenseLayer>;

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
/// `layer_sizes` includes the input and the final single output, e.g. {2, 32, 32, 1}.
ScorerParams init_params(std::span<const int> layer_sizes, std::uint64_t seed);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;           // input to layer l, rows = samples
  std::vector<Eigen::MatrixXd> pre_activations;  // W x + b for layer l
};

struct ForwardResult {
  ProbBatch probs;
  ForwardCache cache;
};

ForwardResult forward(const ScorerParams& params, const Eigen::MatrixXd& x);

/// Scorer outputs only, without keeping a cache.
ProbBatch predict(const ScorerParams& params, const Eigen::MatrixXd& x);

/// Chains dL/df back to parameter gradients. The logistic derivative is
/// evaluated at the clamped output so samples pinned at the clamp keep a
/// finite, non-vanishing logit gradient.
ParamGrads backward(const ScorerParams& params, const ForwardCache& cache, std::span<const double> dloss_dprob);

struct OptimizerSettings {
  double base_lr = 1e-4;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double gamma = 0.995;
};

struct OptimizerState {
  std::vector<DenseLayer> velocity;
  OptimizerSettings settings;
};

OptimizerState make_optimizer_state(const ScorerParams& params, const OptimizerSettings& settings);

/// v <- momentum * v + (g + weight_decay * p);  p <- p - lr * v
void sgd_step(ScorerParams& params, const ParamGrads& grads, OptimizerState& state, double lr);

/// base_lr * gamma^epoch (one decay step per epoch).
double lr_at(const OptimizerState& state, int epoch);
double lr_at(const OptimizerSettings& settings, int epoch);

/// teacher <- alpha * teacher + (1 - alpha) * student, element-wise.
void ema_update(ScorerParams& teacher, const ScorerParams& student, double alpha);

std::vector<double> flatten(const ScorerParams& params);
/// Inverse of flatten, reusing the layer shapes of `shape`.
ScorerParams unflatten(const ScorerParams& shape, std::span<const double> values);
std::vector<double> flatten(const ParamGrads& grads);

// Checkpoint text format (version tag on the first line):
//   pulearn-params v1
//   <layer count>
//   then per layer: "<out> <in>", out*in weights row-major, out biases,
//   one value per line, printed with 17 significant digits.
void write_params(std::ostream& out, const ScorerParams& params);
ScorerParams read_params(std::istream& in);

}  // namespace pulearn
