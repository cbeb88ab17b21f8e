#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "pulearn/error.hpp"
#include "pulearn/sampler.hpp"

using namespace pulearn;

namespace {

std::vector<std::size_t> iota_from(std::size_t start, std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

}  // namespace

TEST_CASE("reference configuration") {
  Rng rng = make_rng(1);
  const auto pos = iota_from(0, 100);
  const auto unl = iota_from(100, 4000);
  const auto plan = stratify(pos, unl, 10, rng);
  REQUIRE(plan.batches.size() == 10);
  for (const auto& b : plan.batches) {
    CHECK(b.positive.size() == 10);
    CHECK(b.unlabeled.size() == 400);
  }
}

TEST_CASE("leftovers sit out") {
  Rng rng = make_rng(2);
  const auto pos = iota_from(0, 105);
  const auto unl = iota_from(1000, 43);
  const auto plan = stratify(pos, unl, 10, rng);
  std::size_t n_pos = 0;
  for (const auto& b : plan.batches) {
    CHECK(b.positive.size() == 10);
    CHECK(b.unlabeled.size() == 4);
    n_pos += b.positive.size();
  }
  CHECK(n_pos == 100);
}

TEST_CASE("exact division covers every index once") {
  Rng rng = make_rng(3);
  const auto pos = iota_from(0, 30);
  const auto unl = iota_from(30, 90);
  const auto plan = stratify(pos, unl, 3, rng);
  std::vector<std::size_t> seen;
  for (const auto& b : plan.batches) {
    seen.insert(seen.end(), b.positive.begin(), b.positive.end());
    seen.insert(seen.end(), b.unlabeled.begin(), b.unlabeled.end());
  }
  std::sort(seen.begin(), seen.end());
  CHECK(seen == iota_from(0, 120));
}

TEST_CASE("same seed, same plan; different seed, different plan") {
  const auto pos = iota_from(0, 50);
  const auto unl = iota_from(50, 500);
  Rng a = make_rng(4), b = make_rng(4), c = make_rng(5);
  const auto pa = stratify(pos, unl, 5, a);
  const auto pb = stratify(pos, unl, 5, b);
  const auto pc = stratify(pos, unl, 5, c);
  CHECK(pa.batches[0].unlabeled == pb.batches[0].unlabeled);
  CHECK(pa.batches[0].unlabeled != pc.batches[0].unlabeled);
}

TEST_CASE("invalid pseudo-batch counts") {
  Rng rng = make_rng(6);
  const auto pos = iota_from(0, 5);
  const auto unl = iota_from(5, 100);
  CHECK_THROWS_AS(stratify(pos, unl, 0, rng), InvalidInput);
  CHECK_THROWS_AS(stratify(pos, unl, 6, rng), InvalidInput);
  CHECK_NOTHROW(stratify(pos, unl, 5, rng));
}
