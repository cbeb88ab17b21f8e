#pragma once

// Brute-force reference computations that the analytic code paths are checked
// against: central finite differences, exact expectations over finite toy
// distributions, and the geometric-series form of the truncated-loss weight.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pulearn/losses.hpp"
#include "pulearn/seeding.hpp"

namespace pulearn::oracle {

using ScalarFn = std::function<double(std::span<const double>)>;

inline constexpr double kDefaultFdStep = 1e-6;

/// (fn(x + eps e_i) - fn(x - eps e_i)) / (2 eps) for every coordinate.
/// Throws OracleError if any evaluation is non-finite.
std::vector<double> finite_diff_grad(const ScalarFn& fn, std::span<const double> point, double eps = kDefaultFdStep);

/// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor = 1e-300);

struct ToyPoint {
  std::vector<double> x;
  double marginal = 0.0;   // P(x)
  double posterior = 0.0;  // P(y = +1 | x)
};

/// Finite world of at most 16 points. Marginals sum to 1 and at least one
/// point with positive mass has posterior exactly 1.
struct DiscreteToyWorld {
  std::vector<ToyPoint> points;
};

inline constexpr std::size_t kMaxToyPoints = 16;

void validate(const DiscreteToyWorld& world);
DiscreteToyWorld random_toy_world(Rng& rng, std::size_t n_points);

struct KlCheck {
  double kl = 0.0;        // KL(P_p || P_hat_p), by direct summation
  double loss_gap = 0.0;  // L_var(f) - L_var(f*), by direct summation
};

/// `f` holds one classifier value per world point, each in (0, 1].
KlCheck exact_variational_kl(const DiscreteToyWorld& world, std::span<const double> f);

/// |(1/n_u) sum_{i=1..o} s^{i-1} - (1 - s^o) / (n_u (1 - s))| with s = 1 - mean(f_u).
/// Throws OracleError when every f_u value sits on the same clamp boundary.
double series_identity_check(const ProbBatch& f_u, TaylorOrder order);

/// Worst deviations observed by run_suite().
struct SuiteReport {
  std::size_t cases = 0;
  double variational_grad_rel = 0.0;
  double taylor_grad_rel = 0.0;
  double cross_entropy_grad_rel = 0.0;
  double symmetric_kl_grad_rel = 0.0;
  double weight_closed_forms_rel = 0.0;  // unlabeled weight: series form vs closed form
  double series_identity_abs = 0.0;
  double kl_identity_abs = 0.0;
  double backward_rel = 0.0;
};

/// Randomised batch generator shared by the suite and the acceptance checks.
struct RandomBatch {
  std::vector<double> f_p;
  std::vector<double> f_u;
  int order = 1;
};
RandomBatch random_batch(Rng& rng, std::size_t max_n = 64, int max_order = 10, double lo = 0.05, double hi = 0.95);

/// Max relative error of analytic vs finite-difference gradients of the
/// variational, Taylor, cross-entropy and symmetric-KL losses over `cases`
/// random batches.
SuiteReport loss_gradient_checks(Rng& rng, std::size_t cases);

/// Max |KL - loss_gap| over `worlds` random toy worlds.
double kl_identity_check(Rng& rng, std::size_t worlds);

/// Max relative error of network backward() against finite differences of
/// each loss composed with forward(), on random nets with <= 3 layers and <= 16 units.
double backward_check(Rng& rng, std::size_t nets);

SuiteReport run_suite(std::uint64_t seed, std::size_t cases);

std::string format_report(const SuiteReport& r);

}  // namespace pulearn::oracle
