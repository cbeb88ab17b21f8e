#include "pulearn/network.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "pulearn/error.hpp"
#include "pulearn/seeding.hpp"

namespace pulearn {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd affine(const DenseLayer& layer, const Eigen::MatrixXd& in) {
  Eigen::MatrixXd z = in * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

void require_grads_match(const ScorerParams& params, const ParamGrads& grads) {
  if (grads.size() != params.layers.size()) throw InvalidInput("gradient layer count does not match parameters");
  for (std::size_t l = 0; l < grads.size(); ++l) {
    const auto& p = params.layers[l];
    const auto& g = grads[l];
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() || g.bias.size() != p.bias.size()) {
      throw InvalidInput("gradient shape mismatch at layer " + std::to_string(l));
    }
  }
}

}  // namespace

std::size_t ScorerParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void check_architecture(const ScorerParams& params) {
  if (params.layers.empty()) throw InvalidInput("scorer has no layers");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0) {
      throw InvalidInput("layer " + std::to_string(l) + " has an empty weight matrix");
    }
    if (layer.bias.size() != layer.weight.rows()) {
      throw InvalidInput("layer " + std::to_string(l) + " bias length does not match its output count");
    }
    if (l > 0 && params.layers[l - 1].weight.rows() != layer.weight.cols()) {
      throw InvalidInput("layer " + std::to_string(l) + " input count does not chain with previous layer");
    }
  }
  if (params.layers.back().weight.rows() != 1) throw InvalidInput("final layer must have exactly one output");
}

bool same_architecture(const ScorerParams& a, const ScorerParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].weight.rows() != b.layers[l].weight.rows() ||
        a.layers[l].weight.cols() != b.layers[l].weight.cols() ||
        a.layers[l].bias.size() != b.layers[l].bias.size()) {
      return false;
    }
  }
  return true;
}

ScorerParams init_params(std::span<const int> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw InvalidInput("init_params: need at least an input and an output size");
  for (int s : layer_sizes) {
    if (s < 1) throw InvalidInput("init_params: layer sizes must be positive");
  }
  if (layer_sizes.back() != 1) throw InvalidInput("init_params: last layer size must be 1");

  Rng rng = make_rng(seed);
  ScorerParams params;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardResult forward(const ScorerParams& params, const Eigen::MatrixXd& x) {
  check_architecture(params);
  if (static_cast<std::size_t>(x.cols()) != params.input_dim()) {
    throw InvalidInput("forward: input has " + std::to_string(x.cols()) + " columns, scorer expects " +
                       std::to_string(params.input_dim()));
  }
  if (x.rows() == 0) throw InvalidInput("forward: empty input");

  ForwardCache cache;
  Eigen::MatrixXd act = x;
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = affine(params.layers[l], act);
    cache.inputs.push_back(std::move(act));
    if (l + 1 < n_layers) act = z.cwiseMax(0.0);
    cache.pre_activations.push_back(std::move(z));
  }

  const Eigen::MatrixXd& logits = cache.pre_activations.back();
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = sigmoid(logits(i, 0));
  return {ProbBatch(std::move(out)), std::move(cache)};
}

ProbBatch predict(const ScorerParams& params, const Eigen::MatrixXd& x) { return forward(params, x).probs; }

ParamGrads backward(const ScorerParams& params, const ForwardCache& cache, std::span<const double> dloss_dprob) {
  const std::size_t n_layers = params.layers.size();
  if (cache.inputs.size() != n_layers || cache.pre_activations.size() != n_layers) {
    throw InvalidInput("backward: cache layer count does not match parameters");
  }
  const Eigen::MatrixXd& logits = cache.pre_activations.back();
  if (static_cast<std::size_t>(logits.rows()) != dloss_dprob.size()) {
    throw InvalidInput("backward: gradient length does not match cached batch");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache.inputs[l].cols() != params.layers[l].weight.cols() ||
        cache.pre_activations[l].cols() != params.layers[l].weight.rows()) {
      throw InvalidInput("backward: cache shapes do not match parameters at layer " + std::to_string(l));
    }
  }

  Eigen::MatrixXd delta(logits.rows(), 1);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double f = clamp_prob(sigmoid(logits(i, 0)));
    delta(i, 0) = dloss_dprob[static_cast<std::size_t>(i)] * f * (1.0 - f);
  }

  ParamGrads grads(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    grads[l].weight = delta.transpose() * cache.inputs[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * params.layers[l].weight;
      delta = upstream.cwiseProduct((cache.pre_activations[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

OptimizerState make_optimizer_state(const ScorerParams& params, const OptimizerSettings& settings) {
  OptimizerState state;
  state.settings = settings;
  for (const auto& l : params.layers) {
    state.velocity.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return state;
}

void sgd_step(ScorerParams& params, const ParamGrads& grads, OptimizerState& state, double lr) {
  require_grads_match(params, grads);
  require_grads_match(params, state.velocity);
  const double mu = state.settings.momentum;
  const double wd = state.settings.weight_decay;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    auto& v = state.velocity[l];
    v.weight = mu * v.weight + (grads[l].weight + wd * p.weight);
    v.bias = mu * v.bias + (grads[l].bias + wd * p.bias);
    p.weight -= lr * v.weight;
    p.bias -= lr * v.bias;
  }
}

double lr_at(const OptimizerSettings& settings, int epoch) {
  return settings.base_lr * std::pow(settings.gamma, static_cast<double>(epoch));
}

double lr_at(const OptimizerState& state, int epoch) { return lr_at(state.settings, epoch); }

void ema_update(ScorerParams& teacher, const ScorerParams& student, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("ema_update: alpha must lie in [0,1]");
  if (!same_architecture(teacher, student)) throw InvalidInput("ema_update: teacher and student architectures differ");
  const double keep = 1.0 - alpha;
  for (std::size_t l = 0; l < teacher.layers.size(); ++l) {
    auto& t = teacher.layers[l];
    const auto& s = student.layers[l];
    t.weight = alpha * t.weight + keep * s.weight;
    t.bias = alpha * t.bias + keep * s.bias;
  }
}

std::vector<double> flatten(const ParamGrads& layers) {
  std::vector<double> out;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

std::vector<double> flatten(const ScorerParams& params) { return flatten(params.layers); }

ScorerParams unflatten(const ScorerParams& shape, std::span<const double> values) {
  if (values.size() != shape.parameter_count()) throw InvalidInput("unflatten: value count does not match shape");
  ScorerParams out = shape;
  std::size_t k = 0;
  for (auto& l : out.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[k++];
  }
  return out;
}

void write_params(std::ostream& out, const ScorerParams& params) {
  check_architecture(params);
  out << "pulearn-params v1\n" << params.layers.size() << '\n';
  out << std::setprecision(17);
  for (const auto& l : params.layers) {
    out << l.weight.rows() << ' ' << l.weight.cols() << '\n';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out << l.weight(r, c) << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << l.bias(r) << '\n';
  }
}

ScorerParams read_params(std::istream& in) {
  std::string tag;
  std::getline(in, tag);
  if (tag != "pulearn-params v1") throw ParseError("unsupported checkpoint header: '" + tag + "'", 1);
  std::size_t n_layers = 0;
  if (!(in >> n_layers) || n_layers == 0) throw ParseError("checkpoint: bad layer count", 2);
  ScorerParams params;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
      throw ParseError("checkpoint: bad shape for layer " + std::to_string(l));
    }
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> layer.weight(r, c))) throw ParseError("checkpoint: truncated weights in layer " + std::to_string(l));
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!(in >> layer.bias(r))) throw ParseError("checkpoint: truncated biases in layer " + std::to_string(l));
    }
    params.layers.push_back(std::move(layer));
  }
  check_architecture(params);
  return params;
}

}  // namespace pulearn
