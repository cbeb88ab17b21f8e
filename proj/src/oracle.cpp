#include "pulearn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pulearn/error.hpp"
#include "pulearn/network.hpp"

namespace pulearn::oracle {
namespace {

// Floor for relative errors of network parameter gradients: entries from dead
// rectifier units are exactly zero analytically and pure rounding noise under
// finite differences.
constexpr double kBackwardFloor = 1e-6;

std::vector<double> uniform_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

double max_rel(std::span<const double> analytic, std::span<const double> numeric, double floor = 1e-300) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) worst = std::max(worst, relative_error(analytic[i], numeric[i], floor));
  return worst;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Splits a flat point back into (positive, unlabeled) batches.
std::pair<ProbBatch, ProbBatch> split(std::span<const double> v, std::size_t n_p) {
  return {ProbBatch(std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_p))),
          ProbBatch(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(n_p), v.end()))};
}

}  // namespace

std::vector<double> finite_diff_grad(const ScalarFn& fn, std::span<const double> point, double eps) {
  if (!(eps > 0.0)) throw OracleError("finite_diff_grad: step must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double up = fn(x);
    x[i] = orig - eps;
    const double down = fn(x);
    x[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw OracleError("finite_diff_grad: non-finite evaluation at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double relative_error(double a, double b, double floor) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

void validate(const DiscreteToyWorld& world) {
  if (world.points.empty() || world.points.size() > kMaxToyPoints) {
    throw OracleError("toy world must have between 1 and 16 points");
  }
  double mass = 0.0;
  bool has_sure_positive = false;
  for (const auto& p : world.points) {
    if (!(p.marginal >= 0.0 && p.marginal <= 1.0) || !(p.posterior >= 0.0 && p.posterior <= 1.0)) {
      throw OracleError("toy world probabilities must lie in [0,1]");
    }
    mass += p.marginal;
    if (p.posterior == 1.0 && p.marginal > 0.0) has_sure_positive = true;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw OracleError("toy world marginals must sum to 1");
  if (!has_sure_positive) throw OracleError("toy world needs a point with posterior 1 and positive mass");
}

DiscreteToyWorld random_toy_world(Rng& rng, std::size_t n_points) {
  if (n_points == 0 || n_points > kMaxToyPoints) throw OracleError("random_toy_world: bad point count");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::normal_distribution<double> coord(0.0, 1.0);
  DiscreteToyWorld world;
  double total = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    ToyPoint p{{coord(rng), coord(rng)}, mass(rng), unit(rng)};
    total += p.marginal;
    world.points.push_back(std::move(p));
  }
  for (auto& p : world.points) p.marginal /= total;
  // Renormalise exactly onto the simplex by absorbing rounding in the last point.
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < n_points; ++i) head += world.points[i].marginal;
  world.points.back().marginal = 1.0 - head;
  std::uniform_int_distribution<std::size_t> pick(0, n_points - 1);
  world.points[pick(rng)].posterior = 1.0;
  validate(world);
  return world;
}

KlCheck exact_variational_kl(const DiscreteToyWorld& world, std::span<const double> f) {
  validate(world);
  if (f.size() != world.points.size()) throw OracleError("exact_variational_kl: one f value per point required");
  for (double v : f) {
    if (!(v > 0.0 && v <= 1.0)) throw OracleError("exact_variational_kl: f must lie in (0,1]");
  }
  const auto& pts = world.points;
  double eu_f = 0.0;
  double eu_star = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    eu_f += pts[i].marginal * f[i];
    eu_star += pts[i].marginal * pts[i].posterior;
  }
  if (!(eu_f > 0.0) || !(eu_star > 0.0)) throw OracleError("exact_variational_kl: E_u[f] is zero");

  KlCheck out;
  double ep_log_f = 0.0;
  double ep_log_star = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double p_pos = pts[i].posterior * pts[i].marginal / eu_star;  // P_p(x)
    if (p_pos <= 0.0) continue;
    const double p_hat = f[i] * pts[i].marginal / eu_f;  // estimated P_p(x)
    out.kl += p_pos * std::log(p_pos / p_hat);
    ep_log_f += p_pos * std::log(f[i]);
    ep_log_star += p_pos * std::log(pts[i].posterior);
  }
  const double l_var_f = std::log(eu_f) - ep_log_f;
  const double l_var_star = std::log(eu_star) - ep_log_star;
  out.loss_gap = l_var_f - l_var_star;
  return out;
}

double series_identity_check(const ProbBatch& f_u, TaylorOrder order) {
  const auto v = f_u.values();
  const bool all_low = std::all_of(v.begin(), v.end(), [](double x) { return x <= kProbEpsilon; });
  const bool all_high = std::all_of(v.begin(), v.end(), [](double x) { return x >= 1.0 - kProbEpsilon; });
  if (all_low || all_high) throw OracleError("series_identity_check: sigma_u is degenerate at a clamp boundary");

  const double n_u = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double s = 1.0 - sum / n_u;
  if (!(s > 0.0 && s < 1.0)) throw OracleError("series_identity_check: sigma_u outside (0,1)");

  double series = 0.0;
  for (int i = 1; i <= order.value(); ++i) series += std::pow(s, i - 1);
  series /= n_u;
  const double closed = (1.0 - std::pow(s, order.value())) / (n_u * (1.0 - s));
  return std::abs(series - closed);
}

RandomBatch random_batch(Rng& rng, std::size_t max_n, int max_order, double lo, double hi) {
  std::uniform_int_distribution<std::size_t> size(1, max_n);
  std::uniform_int_distribution<int> ord(1, max_order);
  RandomBatch b;
  b.f_p = uniform_values(rng, size(rng), lo, hi);
  b.f_u = uniform_values(rng, size(rng), lo, hi);
  b.order = ord(rng);
  return b;
}

SuiteReport loss_gradient_checks(Rng& rng, std::size_t cases) {
  SuiteReport r;
  r.cases = cases;
  for (std::size_t c = 0; c < cases; ++c) {
    const RandomBatch b = random_batch(rng);
    const std::size_t n_p = b.f_p.size();
    const TaylorOrder order(b.order);
    const ProbBatch f_p(b.f_p);
    const ProbBatch f_u(b.f_u);
    const auto point = concat(b.f_p, b.f_u);

    {
      const auto g = variational_loss_grad(f_p, f_u);
      const auto fd = finite_diff_grad(
          [&](std::span<const double> v) {
            auto [p, u] = split(v, n_p);
            return variational_loss(p, u).total;
          },
          point);
      r.variational_grad_rel = std::max(r.variational_grad_rel, max_rel(concat(g.positive, g.unlabeled), fd));
    }
    {
      const auto g = taylor_variational_grad(f_p, f_u, order);
      const auto fd = finite_diff_grad(
          [&](std::span<const double> v) {
            auto [p, u] = split(v, n_p);
            return taylor_variational_loss(p, u, order).total;
          },
          point);
      r.taylor_grad_rel = std::max(r.taylor_grad_rel, max_rel(concat(g.positive, g.unlabeled), fd));
    }
    {
      const auto g = cross_entropy_grad(f_p, f_u);
      const auto fd = finite_diff_grad(
          [&](std::span<const double> v) {
            auto [p, n] = split(v, n_p);
            return cross_entropy_loss(p, n).total;
          },
          point);
      r.cross_entropy_grad_rel = std::max(r.cross_entropy_grad_rel, max_rel(concat(g.positive, g.unlabeled), fd));
    }
    {
      const ProbBatch p_t(uniform_values(rng, f_u.size(), 0.05, 0.95));
      const auto g = symmetric_kl_grad(p_t, f_u);
      const auto fd = finite_diff_grad([&](std::span<const double> v) {
        return symmetric_kl(p_t, ProbBatch(std::vector<double>(v.begin(), v.end())));
      }, b.f_u);
      r.symmetric_kl_grad_rel = std::max(r.symmetric_kl_grad_rel, max_rel(g, fd));
    }

    // Closed form against the finite geometric sum, computed independently here.
    const double n_u = static_cast<double>(f_u.size());
    double sum = 0.0;
    for (double v : f_u.values()) sum += v;
    const double s = 1.0 - sum / n_u;
    double series = 0.0;
    for (int i = 1; i <= b.order; ++i) series += std::pow(s, i - 1);
    series /= n_u;
    r.weight_closed_forms_rel =
        std::max(r.weight_closed_forms_rel, relative_error(unlabeled_gradient_weight(f_u, order), series, 1.0));
    r.series_identity_abs = std::max(r.series_identity_abs, series_identity_check(f_u, order));
  }
  return r;
}

double kl_identity_check(Rng& rng, std::size_t worlds) {
  std::uniform_int_distribution<std::size_t> n_points(1, kMaxToyPoints);
  std::uniform_real_distribution<double> fval(0.01, 1.0);
  double worst = 0.0;
  for (std::size_t w = 0; w < worlds; ++w) {
    const DiscreteToyWorld world = random_toy_world(rng, n_points(rng));
    std::vector<double> f(world.points.size());
    for (auto& v : f) v = fval(rng);
    const KlCheck k = exact_variational_kl(world, f);
    worst = std::max(worst, std::abs(k.kl - k.loss_gap));
  }
  return worst;
}

double backward_check(Rng& rng, std::size_t nets) {
  std::uniform_int_distribution<int> depth(1, 3);
  std::uniform_int_distribution<int> width(1, 16);
  std::uniform_int_distribution<int> in_dim(1, 5);
  std::uniform_int_distribution<std::size_t> n_pos(1, 8);
  std::uniform_int_distribution<std::size_t> n_unl(1, 16);
  std::uniform_int_distribution<int> ord(1, 10);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> seeds;

  double worst = 0.0;
  for (std::size_t k = 0; k < nets; ++k) {
    std::vector<int> sizes{in_dim(rng)};
    const int layers = depth(rng);
    for (int l = 1; l < layers; ++l) sizes.push_back(width(rng));
    sizes.push_back(1);
    ScorerParams params = init_params(sizes, seeds(rng));
    for (auto& layer : params.layers) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = 0.1 * gauss(rng);
    }
    const ScorerParams teacher = init_params(sizes, seeds(rng));

    const std::size_t np = n_pos(rng);
    const std::size_t n = np + n_unl(rng);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), sizes.front());
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    const ProbBatch p_t = predict(teacher, x);
    const TaylorOrder order(ord(rng));

    // Each objective maps network outputs to (loss, dloss/df).
    using Objective = std::function<std::pair<double, std::vector<double>>(const ProbBatch&)>;
    const std::vector<Objective> objectives{
        [&](const ProbBatch& f) {
          auto [p, u] = split(f.values(), np);
          auto g = variational_loss_grad(p, u);
          return std::pair{variational_loss(p, u).total, concat(g.positive, g.unlabeled)};
        },
        [&](const ProbBatch& f) {
          auto [p, u] = split(f.values(), np);
          auto g = taylor_variational_grad(p, u, order);
          return std::pair{taylor_variational_loss(p, u, order).total, concat(g.positive, g.unlabeled)};
        },
        [&](const ProbBatch& f) {
          auto [p, u] = split(f.values(), np);
          auto g = cross_entropy_grad(p, u);
          return std::pair{cross_entropy_loss(p, u).total, concat(g.positive, g.unlabeled)};
        },
        [&](const ProbBatch& f) { return std::pair{symmetric_kl(p_t, f), symmetric_kl_grad(p_t, f)}; },
        [&](const ProbBatch& f) { return std::pair{l2_consistency(p_t, f), l2_consistency_grad(p_t, f)}; },
    };

    const auto theta = flatten(params);
    for (const auto& objective : objectives) {
      const ForwardResult fr = forward(params, x);
      const auto analytic = flatten(backward(params, fr.cache, objective(fr.probs).second));
      const auto numeric = finite_diff_grad(
          [&](std::span<const double> t) { return objective(predict(unflatten(params, t), x)).first; }, theta);
      worst = std::max(worst, max_rel(analytic, numeric, kBackwardFloor));
    }
  }
  return worst;
}

SuiteReport run_suite(std::uint64_t seed, std::size_t cases) {
  Rng rng = make_rng(seed);
  SuiteReport r = loss_gradient_checks(rng, cases);
  r.kl_identity_abs = kl_identity_check(rng, std::max<std::size_t>(cases / 10, 1));
  r.backward_rel = backward_check(rng, std::max<std::size_t>(cases / 20, 1));
  return r;
}

std::string format_report(const SuiteReport& r) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific;
  os << "cases                          " << r.cases << '\n'
     << "variational grad vs FD (rel)   " << r.variational_grad_rel << '\n'
     << "taylor grad vs FD (rel)        " << r.taylor_grad_rel << '\n'
     << "cross-entropy grad vs FD (rel) " << r.cross_entropy_grad_rel << '\n'
     << "symmetric KL grad vs FD (rel)  " << r.symmetric_kl_grad_rel << '\n'
     << "weight closed forms (rel)      " << r.weight_closed_forms_rel << '\n'
     << "series identity (abs)          " << r.series_identity_abs << '\n'
     << "KL identity (abs)              " << r.kl_identity_abs << '\n'
     << "backward vs FD (rel)           " << r.backward_rel << '\n';
  return os.str();
}

}  // namespace pulearn::oracle
