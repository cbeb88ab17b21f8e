#include "pulearn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulearn/error.hpp"

namespace pulearn {
namespace {

void require_same_length(const ProbBatch& a, const ProbBatch& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidInput(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                       " vs " + std::to_string(b.size()) + ")");
  }
}

double mean_log(const ProbBatch& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += std::log(v);
  return acc / static_cast<double>(f.size());
}

double sigma_u(const ProbBatch& f_u) { return 1.0 - f_u.mean(); }

GradBatch positive_grad(const ProbBatch& f_p) {
  const double n_p = static_cast<double>(f_p.size());
  GradBatch g(f_p.size());
  for (std::size_t i = 0; i < f_p.size(); ++i) g[i] = -1.0 / (n_p * f_p[i]);
  return g;
}

double bernoulli_kl(double p, double q) {
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

}  // namespace

double clamp_prob(double p) noexcept { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

ProbBatch::ProbBatch(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("ProbBatch: empty batch");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::isnan(values_[i])) throw InvalidInput("ProbBatch: NaN at index " + std::to_string(i));
    values_[i] = clamp_prob(values_[i]);
  }
}

double ProbBatch::sum() const noexcept {
  double acc = 0.0;
  for (double v : values_) acc += v;
  return acc;
}

TaylorOrder::TaylorOrder(int order) : order_(order) {
  if (order < 1) throw InvalidInput("TaylorOrder: order must be >= 1, got " + std::to_string(order));
}

LossBreakdown variational_loss(const ProbBatch& f_p, const ProbBatch& f_u) {
  LossBreakdown out;
  out.unlabeled_part = std::log(f_u.mean());
  out.positive_part = -mean_log(f_p);
  out.total = out.positive_part + out.unlabeled_part;
  return out;
}

GradPair variational_loss_grad(const ProbBatch& f_p, const ProbBatch& f_u) {
  return {positive_grad(f_p), GradBatch(f_u.size(), 1.0 / f_u.sum())};
}

double taylor_log_term(double mean_u, TaylorOrder order) {
  if (!(mean_u > 0.0 && mean_u < 1.0)) {
    throw InvalidInput("taylor_log_term: mean must lie in (0,1), got " + std::to_string(mean_u));
  }
  const double sigma = 1.0 - mean_u;
  double power = 1.0;
  double acc = 0.0;
  for (int i = 1; i <= order.value(); ++i) {
    power *= sigma;
    acc -= power / i;
  }
  return acc;
}

LossBreakdown taylor_variational_loss(const ProbBatch& f_p, const ProbBatch& f_u, TaylorOrder order) {
  LossBreakdown out;
  out.unlabeled_part = taylor_log_term(f_u.mean(), order);
  out.positive_part = -mean_log(f_p);
  out.total = out.positive_part + out.unlabeled_part;
  return out;
}

GradPair taylor_variational_grad(const ProbBatch& f_p, const ProbBatch& f_u, TaylorOrder order) {
  return {positive_grad(f_p), GradBatch(f_u.size(), unlabeled_gradient_weight(f_u, order))};
}

double unlabeled_gradient_weight(const ProbBatch& f_u, std::optional<TaylorOrder> order) {
  const double total = f_u.sum();
  if (!order) return 1.0 / total;
  return (1.0 - std::pow(sigma_u(f_u), order->value())) / total;
}

double unlabeled_gradient_weight_series(const ProbBatch& f_u, TaylorOrder order) {
  const double sigma = sigma_u(f_u);
  double power = 1.0;
  double acc = 0.0;
  for (int i = 1; i <= order.value(); ++i) {
    acc += power;
    power *= sigma;
  }
  return acc / static_cast<double>(f_u.size());
}

LossBreakdown cross_entropy_loss(const ProbBatch& f_p, const ProbBatch& f_n) {
  const double k = static_cast<double>(f_p.size() + f_n.size());
  double pos = 0.0;
  for (double v : f_p.values()) pos -= std::log(v);
  double neg = 0.0;
  for (double v : f_n.values()) neg -= std::log1p(-v);
  LossBreakdown out;
  out.positive_part = pos / k;
  out.unlabeled_part = neg / k;
  out.total = out.positive_part + out.unlabeled_part;
  return out;
}

GradPair cross_entropy_grad(const ProbBatch& f_p, const ProbBatch& f_n) {
  const double k = static_cast<double>(f_p.size() + f_n.size());
  GradPair g{GradBatch(f_p.size()), GradBatch(f_n.size())};
  for (std::size_t i = 0; i < f_p.size(); ++i) g.positive[i] = -1.0 / (k * f_p[i]);
  for (std::size_t i = 0; i < f_n.size(); ++i) g.unlabeled[i] = 1.0 / (k * (1.0 - f_n[i]));
  return g;
}

double symmetric_kl(const ProbBatch& p_t, const ProbBatch& p_s) {
  require_same_length(p_t, p_s, "symmetric_kl");
  double acc = 0.0;
  for (std::size_t i = 0; i < p_t.size(); ++i) {
    acc += bernoulli_kl(p_t[i], p_s[i]) + bernoulli_kl(p_s[i], p_t[i]);
  }
  return acc / static_cast<double>(p_t.size());
}

GradBatch symmetric_kl_grad(const ProbBatch& p_t, const ProbBatch& p_s) {
  require_same_length(p_t, p_s, "symmetric_kl_grad");
  const double n = static_cast<double>(p_t.size());
  GradBatch g(p_s.size());
  for (std::size_t i = 0; i < p_s.size(); ++i) {
    const double t = p_t[i];
    const double s = p_s[i];
    // d/ds KL(t||s) = (1-t)/(1-s) - t/s ;  d/ds KL(s||t) = log(s/t) - log((1-s)/(1-t))
    const double forward = (1.0 - t) / (1.0 - s) - t / s;
    const double reverse = std::log(s / t) - std::log((1.0 - s) / (1.0 - t));
    g[i] = (forward + reverse) / n;
  }
  return g;
}

double l2_consistency(const ProbBatch& p_t, const ProbBatch& p_s) {
  require_same_length(p_t, p_s, "l2_consistency");
  double acc = 0.0;
  for (std::size_t i = 0; i < p_t.size(); ++i) {
    const double d = p_t[i] - p_s[i];
    acc += d * d;
  }
  return acc / static_cast<double>(p_t.size());
}

GradBatch l2_consistency_grad(const ProbBatch& p_t, const ProbBatch& p_s) {
  require_same_length(p_t, p_s, "l2_consistency_grad");
  const double n = static_cast<double>(p_t.size());
  GradBatch g(p_s.size());
  for (std::size_t i = 0; i < p_s.size(); ++i) g[i] = -2.0 * (p_t[i] - p_s[i]) / n;
  return g;
}

double student_objective(const LossBreakdown& tar, double consistency, double beta) {
  if (!(beta >= 0.0)) throw InvalidInput("student_objective: beta must be >= 0");
  return tar.total + beta * consistency;
}

}  // namespace pulearn
