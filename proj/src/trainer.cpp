#include "pulearn/trainer.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "pulearn/error.hpp"
#include "pulearn/sampler.hpp"
#include "pulearn/seeding.hpp"

namespace pulearn {
namespace {

struct BatchStep {
  LossBreakdown loss;
  double consistency = 0.0;
  double objective = 0.0;
};

std::vector<double> slice(std::span<const double> v, std::size_t first, std::size_t count) {
  return {v.begin() + static_cast<std::ptrdiff_t>(first), v.begin() + static_cast<std::ptrdiff_t>(first + count)};
}

GradPair target_loss(const TrainerConfig& cfg, const ProbBatch& f_p, const ProbBatch& f_u, LossBreakdown& out) {
  switch (cfg.loss) {
    case LossChoice::taylor: {
      const TaylorOrder order(cfg.taylor_order);
      out = taylor_variational_loss(f_p, f_u, order);
      return taylor_variational_grad(f_p, f_u, order);
    }
    case LossChoice::variational:
      out = variational_loss(f_p, f_u);
      return variational_loss_grad(f_p, f_u);
    case LossChoice::cross_entropy_on_unlabeled:
      out = cross_entropy_loss(f_p, f_u);
      return cross_entropy_grad(f_p, f_u);
  }
  throw InvalidInput("unknown loss choice");
}

BatchStep student_step(const TrainerConfig& cfg, ScorerParams& student, const ScorerParams& teacher,
                       OptimizerState& opt, double lr, const Eigen::MatrixXd& xb, std::size_t n_pos) {
  BatchStep step;
  // Forward only rejects inputs here when a diverged net produces NaN outputs.
  std::optional<ForwardResult> fr;
  try {
    fr.emplace(forward(student, xb));
  } catch (const InvalidInput&) {
    step.objective = std::numeric_limits<double>::quiet_NaN();
    return step;
  }
  const ProbBatch& probs = fr->probs;
  const std::size_t n = probs.size();
  const ProbBatch f_p(slice(probs.values(), 0, n_pos));
  const ProbBatch f_u(slice(probs.values(), n_pos, n - n_pos));

  const GradPair g = target_loss(cfg, f_p, f_u, step.loss);
  std::vector<double> dloss(n);
  std::copy(g.positive.begin(), g.positive.end(), dloss.begin());
  std::copy(g.unlabeled.begin(), g.unlabeled.end(), dloss.begin() + static_cast<std::ptrdiff_t>(n_pos));

  const Consistency mode = cfg.toggles.consistency;
  if (mode != Consistency::none) {
    std::optional<ProbBatch> teacher_out;
    try {
      teacher_out.emplace(predict(teacher, xb));  // constant: no gradient into the teacher
    } catch (const InvalidInput&) {
      step.objective = std::numeric_limits<double>::quiet_NaN();
      return step;
    }
    const ProbBatch& p_t = *teacher_out;
    const bool kl = mode == Consistency::kl;
    step.consistency = kl ? symmetric_kl(p_t, probs) : l2_consistency(p_t, probs);
    const GradBatch gc = kl ? symmetric_kl_grad(p_t, probs) : l2_consistency_grad(p_t, probs);
    for (std::size_t i = 0; i < n; ++i) dloss[i] += cfg.beta * gc[i];
  }
  step.objective = student_objective(step.loss, step.consistency, cfg.beta);
  if (!std::isfinite(step.objective)) return step;

  const ParamGrads grads = backward(student, fr->cache, dloss);
  sgd_step(student, grads, opt, lr);
  return step;
}

}  // namespace

std::string_view to_string(LossChoice c) {
  switch (c) {
    case LossChoice::taylor: return "taylor";
    case LossChoice::variational: return "variational";
    case LossChoice::cross_entropy_on_unlabeled: return "cross_entropy_on_unlabeled";
  }
  return "?";
}

std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::none: return "none";
    case Consistency::l2: return "l2";
    case Consistency::kl: return "kl";
  }
  return "?";
}

LossChoice parse_loss_choice(std::string_view s) {
  if (s == "taylor") return LossChoice::taylor;
  if (s == "variational") return LossChoice::variational;
  if (s == "cross_entropy_on_unlabeled") return LossChoice::cross_entropy_on_unlabeled;
  throw InvalidInput("loss: expected taylor|variational|cross_entropy_on_unlabeled, got '" + std::string(s) + "'");
}

Consistency parse_consistency(std::string_view s) {
  if (s == "none") return Consistency::none;
  if (s == "l2") return Consistency::l2;
  if (s == "kl") return Consistency::kl;
  throw InvalidInput("consistency: expected none|l2|kl, got '" + std::string(s) + "'");
}

void validate(const TrainerConfig& c) {
  if (c.taylor_order < 1) throw InvalidInput("order: must be >= 1");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw InvalidInput("alpha: must lie in [0,1]");
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) throw InvalidInput("beta: must be >= 0");
  if (c.pseudo_batches < 1) throw InvalidInput("pseudo_batches: must be >= 1");
  if (c.epochs < 1) throw InvalidInput("epochs: must be >= 1");
  if (!(c.optimizer.base_lr > 0.0)) throw InvalidInput("lr: must be > 0");
  if (!(c.optimizer.momentum >= 0.0 && c.optimizer.momentum < 1.0)) throw InvalidInput("momentum: must lie in [0,1)");
  if (!(c.optimizer.weight_decay >= 0.0)) throw InvalidInput("weight_decay: must be >= 0");
  if (!(c.optimizer.gamma > 0.0 && c.optimizer.gamma <= 1.0)) throw InvalidInput("gamma: must lie in (0,1]");
  for (int h : c.hidden_layers) {
    if (h < 1) throw InvalidInput("hidden_layers: sizes must be positive");
  }
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw InvalidInput("threshold: must lie in (0,1)");
  if (!c.toggles.use_ema && c.toggles.consistency != Consistency::none) {
    throw InvalidInput("consistency: a consistency term requires use_ema");
  }
}

std::vector<int> layer_sizes(const TrainerConfig& config, std::size_t input_dim) {
  std::vector<int> sizes{static_cast<int>(input_dim)};
  sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  sizes.push_back(1);
  return sizes;
}

const Metrics& TrainResult::final_metrics(const AblationToggles& toggles) const {
  if (history.empty()) throw InvalidInput("final_metrics: empty history");
  return toggles.use_ema ? history.back().teacher_metrics : history.back().student_metrics;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Metrics evaluate(const ScorerParams& params, const Eigen::MatrixXd& x, std::span<const std::uint8_t> labels,
                 double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidInput("evaluate: threshold must lie in (0,1)");
  if (x.rows() == 0 || labels.empty()) throw InvalidInput("evaluate: empty input");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InvalidInput("evaluate: row/label count mismatch");
  const ProbBatch probs = predict(params, x);
  std::vector<std::uint8_t> preds(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = probs[i] >= threshold ? 1 : 0;
  return confusion(preds, labels);
}

TrainResult train(const PuDataset& data, const TrainerConfig& config) {
  validate(config);
  validate(data);
  if (data.positive_idx.empty() || data.unlabeled_idx.empty()) {
    throw InvalidInput("train: dataset needs labeled positives and unlabeled samples");
  }

  const auto sizes = layer_sizes(config, data.dim());
  TrainResult result;
  result.student = init_params(sizes, derive_seed(config.seed, "init"));
  result.teacher = result.student;
  OptimizerState opt = make_optimizer_state(result.student, config.optimizer);
  Rng sampler_rng = make_rng(derive_seed(config.seed, "sampler"));

  const auto eval_rows = data.held_out_idx();
  const Eigen::MatrixXd x_eval = gather_rows(data.features, eval_rows);
  std::vector<std::uint8_t> y_eval(eval_rows.size());
  for (std::size_t i = 0; i < eval_rows.size(); ++i) y_eval[i] = data.hidden_labels[eval_rows[i]];

  std::vector<std::size_t> rows;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(opt, epoch);
    const StratifiedEpochPlan plan = stratify(data.positive_idx, data.unlabeled_idx, config.pseudo_batches, sampler_rng);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr;
    for (const PseudoBatch& batch : plan.batches) {
      rows.assign(batch.positive.begin(), batch.positive.end());
      rows.insert(rows.end(), batch.unlabeled.begin(), batch.unlabeled.end());
      const Eigen::MatrixXd xb = gather_rows(data.features, rows);

      const BatchStep step =
          student_step(config, result.student, result.teacher, opt, lr, xb, batch.positive.size());
      if (!std::isfinite(step.objective)) {
        throw NonFiniteLoss("non-finite student objective in epoch " + std::to_string(epoch + 1),
                            std::move(result.history));
      }
      if (config.toggles.use_ema) ema_update(result.teacher, result.student, config.alpha);

      rec.student.total += step.loss.total;
      rec.student.positive_part += step.loss.positive_part;
      rec.student.unlabeled_part += step.loss.unlabeled_part;
      rec.consistency += step.consistency;
      rec.objective += step.objective;
    }
    const double nb = static_cast<double>(plan.batches.size());
    rec.student.total /= nb;
    rec.student.positive_part /= nb;
    rec.student.unlabeled_part /= nb;
    rec.consistency /= nb;
    rec.objective /= nb;

    try {
      rec.student_metrics = evaluate(result.student, x_eval, y_eval, config.threshold);
      rec.teacher_metrics = evaluate(result.teacher, x_eval, y_eval, config.threshold);
    } catch (const InvalidInput&) {
      throw NonFiniteLoss("non-finite network output after epoch " + std::to_string(epoch + 1),
                          std::move(result.history));
    }
    result.history.push_back(rec);
  }
  return result;
}

TrainResult ablation_run(const PuDataset& data, const TrainerConfig& config, const AblationToggles& toggles) {
  TrainerConfig c = config;
  c.toggles = toggles;
  return train(data, c);
}

}  // namespace pulearn
