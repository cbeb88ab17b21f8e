#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pulearn/data.hpp"
#include "pulearn/error.hpp"

using namespace pulearn;

namespace {

void check_masks(const PuDataset& d, std::size_t n_labeled) {
  CHECK(d.positive_idx.size() == n_labeled);
  CHECK(d.positive_idx.size() + d.unlabeled_idx.size() == d.size());
  for (auto i : d.positive_idx) CHECK(d.hidden_labels[i] == 1);
  std::vector<std::size_t> all = d.positive_idx;
  all.insert(all.end(), d.unlabeled_idx.begin(), d.unlabeled_idx.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK_NOTHROW(validate(d));
}

}  // namespace

TEST_CASE("gaussians") {
  const auto d = make_gaussians({.n = 1000, .prior = 0.5, .seed = 3});
  CHECK(d.size() == 1000);
  CHECK(d.dim() == 2);
  const auto n_pos = std::count(d.hidden_labels.begin(), d.hidden_labels.end(), 1);
  CHECK(n_pos > 430);
  CHECK(n_pos < 570);
  check_masks(d, 40);
  REQUIRE(d.gen_class_prior.has_value());
  CHECK(*d.gen_class_prior == 0.5);

  const auto again = make_gaussians({.n = 1000, .prior = 0.5, .seed = 3});
  CHECK(d.features == again.features);
  CHECK(d.positive_idx == again.positive_idx);
  CHECK(d.features != make_gaussians({.n = 1000, .prior = 0.5, .seed = 4}).features);

  CHECK_THROWS_AS(make_gaussians({.n = 100, .prior = 0.3, .n_labeled = 31}), InvalidInput);
  CHECK_THROWS_AS(make_gaussians({.n = 100, .prior = 1.0}), InvalidInput);
}

TEST_CASE("gaussians with a cap on the unlabeled pool") {
  const auto d = make_gaussians({.n = 500, .seed = 8, .unlabeled_cap = 100});
  CHECK(d.unlabeled_idx.size() == 100);
  CHECK(d.held_out_idx().size() == 460);
  CHECK_NOTHROW(validate(d));
}

TEST_CASE("two moons") {
  const auto clean = make_two_moons({.n = 100, .noise = 0.0, .seed = 1});
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double x = clean.features(static_cast<Eigen::Index>(i), 0);
    const double y = clean.features(static_cast<Eigen::Index>(i), 1);
    const double r = clean.hidden_labels[i] ? std::hypot(x, y) : std::hypot(x - 1.0, y - 0.5);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto full = make_two_moons({.n = 100, .n_labeled = 50, .seed = 2});
  check_masks(full, 50);
  for (auto i : full.unlabeled_idx) CHECK(full.hidden_labels[i] == 0);
  CHECK_THROWS_AS(make_two_moons({.n = 100, .n_labeled = 51}), InvalidInput);
}

TEST_CASE("csv fixture") {
  std::istringstream in("a,label,b\n1.5,1,2\n-3,0,4e2\n0.25,1,-1\n");
  const auto d = read_csv(in, {.n_labeled = 1, .seed = 1});
  REQUIRE(d.size() == 3);
  REQUIRE(d.dim() == 2);
  Eigen::MatrixXd expected(3, 2);
  expected << 1.5, 2, -3, 400, 0.25, -1;
  CHECK(d.features == expected);
  CHECK(d.hidden_labels == std::vector<std::uint8_t>{1, 0, 1});
  check_masks(d, 1);
}

TEST_CASE("csv errors name the cell") {
  SUBCASE("NaN") {
    std::istringstream in("x0,x1,label\n1,2,1\n3,nan,0\n");
    try {
      read_csv(in, {.n_labeled = 1});
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
      CHECK(e.column() == 2);
      CHECK(std::string(e.what()).find("x1") != std::string::npos);
    }
  }
  SUBCASE("non-numeric") {
    std::istringstream in("x0,label\nabc,1\n");
    CHECK_THROWS_AS(read_csv(in, {.n_labeled = 1}), ParseError);
  }
  SUBCASE("empty") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_csv(in, {}), ParseError);
  }
  SUBCASE("missing label column") {
    std::istringstream in("x0,x1\n1,2\n");
    CHECK_THROWS_AS(read_csv(in, {}), ParseError);
  }
  SUBCASE("ragged row") {
    std::istringstream in("x0,label\n1,1\n2\n");
    CHECK_THROWS_AS(read_csv(in, {.n_labeled = 1}), ParseError);
  }
  SUBCASE("too many labeled") {
    std::istringstream in("x0,label\n1,1\n2,0\n");
    CHECK_THROWS_AS(read_csv(in, {.n_labeled = 2}), InvalidInput);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {}), ParseError);
  }
}

TEST_CASE("csv round trip is exact") {
  const auto d = make_two_moons({.n = 300, .noise = 0.2, .seed = 9});
  std::stringstream ss;
  write_csv(ss, d);
  const auto back = read_csv(ss, {.n_labeled = 40, .seed = 9});
  CHECK(back.features == d.features);
  CHECK(back.hidden_labels == d.hidden_labels);
}

TEST_CASE("standardize") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  standardize_columns(x);
  CHECK(std::abs(x.col(0).mean()) < 1e-15);
  CHECK(x.col(0).squaredNorm() / 4.0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x.col(1).isZero());
}
