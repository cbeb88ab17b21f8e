#pragma once

// PU objectives on scorer outputs f(x) in (0,1), with analytic gradients
// taken with respect to those outputs (not network parameters).
//
// Naming used throughout:
//   f_p   scorer outputs on labeled positives, n_p = f_p.size()
//   f_u   scorer outputs on unlabeled samples, n_u = f_u.size()
//   sigma_u = 1 - mean(f_u)
//   sigma_p = sum(log f_p)

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pulearn {

/// Probabilities are clamped into [kProbEpsilon, 1 - kProbEpsilon] before any log.
inline constexpr double kProbEpsilon = 1e-7;

double clamp_prob(double p) noexcept;

/// Non-empty batch of scorer outputs, clamped on construction.
/// Throws InvalidInput on empty input or NaN.
class ProbBatch {
 public:
  explicit ProbBatch(std::vector<double> values);
  ProbBatch(std::initializer_list<double> values) : ProbBatch(std::vector<double>(values)) {}

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double sum() const noexcept;
  double mean() const noexcept { return sum() / static_cast<double>(values_.size()); }

 private:
  std::vector<double> values_;
};

/// total == positive_part + unlabeled_part. For cross-entropy the
/// unlabeled slot holds the negative-class term.
struct LossBreakdown {
  double total = 0.0;
  double positive_part = 0.0;
  double unlabeled_part = 0.0;
};

/// Order of the truncated log series; always >= 1.
class TaylorOrder {
 public:
  explicit TaylorOrder(int order);
  int value() const noexcept { return order_; }

 private:
  int order_;
};

/// dL/df aligned element-wise with the source ProbBatch.
using GradBatch = std::vector<double>;

struct GradPair {
  GradBatch positive;
  GradBatch unlabeled;
};

/// log(mean f_u) - mean(log f_p).
LossBreakdown variational_loss(const ProbBatch& f_p, const ProbBatch& f_u);

/// Unlabeled entries all equal 1 / sum(f_u); positive entries are -1 / (n_p f_i).
GradPair variational_loss_grad(const ProbBatch& f_p, const ProbBatch& f_u);

/// Order-o truncation of log(mean_u) expanded around 1:
///   sum_{i=1..o} -(1 - mean_u)^i / i
/// Requires 0 < mean_u < 1.
double taylor_log_term(double mean_u, TaylorOrder order);

/// Variational loss with log(mean f_u) replaced by its order-o truncation.
/// Upper-bounds variational_loss and is non-increasing in o.
LossBreakdown taylor_variational_loss(const ProbBatch& f_p, const ProbBatch& f_u, TaylorOrder order);

/// Unlabeled entries all equal (1 - sigma_u^o) / sum(f_u); positive entries
/// match variational_loss_grad.
GradPair taylor_variational_grad(const ProbBatch& f_p, const ProbBatch& f_u, TaylorOrder order);

/// Per-sample unlabeled gradient weight in closed form (1 - sigma_u^o) / sum(f_u).
/// std::nullopt selects the untruncated (variational) weight 1 / sum(f_u).
double unlabeled_gradient_weight(const ProbBatch& f_u, std::optional<TaylorOrder> order);

/// The same weight written as the finite geometric sum (1/n_u) sum_{i=1..o} sigma_u^{i-1}.
double unlabeled_gradient_weight_series(const ProbBatch& f_u, TaylorOrder order);

/// Binary cross-entropy treating f_n as negatives; both sums divided by k = n_p + n_n.
LossBreakdown cross_entropy_loss(const ProbBatch& f_p, const ProbBatch& f_n);
GradPair cross_entropy_grad(const ProbBatch& f_p, const ProbBatch& f_n);

/// KL(p_t || p_s) + KL(p_s || p_t) of per-sample Bernoulli distributions,
/// averaged over the batch.
double symmetric_kl(const ProbBatch& p_t, const ProbBatch& p_s);
/// Gradient of symmetric_kl with respect to p_s; p_t is held constant.
GradBatch symmetric_kl_grad(const ProbBatch& p_t, const ProbBatch& p_s);

/// mean((p_t - p_s)^2), the Mean-Teacher style consistency term.
double l2_consistency(const ProbBatch& p_t, const ProbBatch& p_s);
GradBatch l2_consistency_grad(const ProbBatch& p_t, const ProbBatch& p_s);

/// tar.total + beta * consistency. Throws InvalidInput for beta < 0.
double student_objective(const LossBreakdown& tar, double consistency, double beta);

}  // namespace pulearn
