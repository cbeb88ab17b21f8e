#include <cmath>

#include "doctest.h"
#include "pulearn/error.hpp"
#include "pulearn/oracle.hpp"

using namespace pulearn;

TEST_CASE("finite differences of a quadratic") {
  const std::vector<double> x{1.0, -2.0, 0.5};
  const auto g = oracle::finite_diff_grad(
      [](std::span<const double> v) { return v[0] * v[0] + 3 * v[1] + v[0] * v[2]; }, x);
  CHECK(g[0] == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(g[2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(oracle::finite_diff_grad([](std::span<const double> v) { return std::log(v[0]); },
                                           std::vector<double>{0.0}),
                  OracleError);
}

TEST_CASE("relative error") {
  CHECK(oracle::relative_error(1.0, 1.1) == doctest::Approx(0.1 / 1.1));
  CHECK(oracle::relative_error(0.0, 0.0) == 0.0);
  CHECK(oracle::relative_error(1e-9, 2e-9, 1.0) == doctest::Approx(1e-9));
}

TEST_CASE("series identity") {
  // sigma = 0.5, n_u = 2, o = 3: (1/2)(1 + 0.5 + 0.25) = 0.875
  CHECK(unlabeled_gradient_weight_series(ProbBatch{0.5, 0.5}, TaylorOrder(3)) == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(oracle::series_identity_check(ProbBatch{0.5, 0.5}, TaylorOrder(3)) < 1e-15);
  CHECK_THROWS_AS(oracle::series_identity_check(ProbBatch{0.0, 0.0}, TaylorOrder(3)), OracleError);
}

TEST_CASE("toy worlds") {
  Rng rng = make_rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto w = oracle::random_toy_world(rng, 1 + static_cast<std::size_t>(t) % oracle::kMaxToyPoints);
    CHECK_NOTHROW(oracle::validate(w));
  }
  oracle::DiscreteToyWorld no_anchor{{{{0.0}, 0.5, 0.4}, {{1.0}, 0.5, 0.9}}};
  CHECK_THROWS_AS(oracle::validate(no_anchor), OracleError);

  SUBCASE("a perfect classifier has zero divergence") {
    oracle::DiscreteToyWorld w{{{{0.0}, 0.25, 1.0}, {{1.0}, 0.5, 0.5}, {{2.0}, 0.25, 0.0}}};
    const std::vector<double> f_star{1.0, 0.5, 1e-15};
    const auto k = oracle::exact_variational_kl(w, f_star);
    CHECK(std::abs(k.kl) < 1e-12);
    CHECK(std::abs(k.loss_gap) < 1e-12);
    const std::vector<double> f{0.7, 0.6, 0.2};
    const auto k2 = oracle::exact_variational_kl(w, f);
    CHECK(k2.kl > 0.0);
    CHECK(std::abs(k2.kl - k2.loss_gap) < 1e-12);
  }
}

TEST_CASE("small suite run") {
  const auto r = oracle::run_suite(99, 50);
  CHECK(r.cases == 50);
  CHECK(r.variational_grad_rel < 1e-6);
  CHECK(r.taylor_grad_rel < 1e-6);
  CHECK(r.cross_entropy_grad_rel < 1e-6);
  CHECK(r.symmetric_kl_grad_rel < 1e-6);
  CHECK(r.weight_closed_forms_rel < 1e-12);
  CHECK(r.kl_identity_abs < 1e-12);
  CHECK(r.backward_rel < 1e-5);
  CHECK(oracle::format_report(r).find("variational") != std::string::npos);
}
