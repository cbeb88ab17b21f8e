#include <cmath>

#include "doctest.h"
#include "pulearn/error.hpp"
#include "pulearn/seeding.hpp"
#include "pulearn/trainer.hpp"

using namespace pulearn;

namespace {

TrainerConfig short_config(int epochs = 5) {
  TrainerConfig c;
  c.epochs = epochs;
  c.hidden_layers = {8};
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  TrainerConfig c;
  CHECK_NOTHROW(validate(c));
  c.beta = -0.5;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("beta"), InvalidInput);
  c = {};
  c.alpha = 1.2;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("alpha"), InvalidInput);
  c = {};
  c.taylor_order = 0;
  CHECK_THROWS_AS(validate(c), InvalidInput);
  c = {};
  c.toggles = {false, Consistency::kl};
  CHECK_THROWS_AS(validate(c), InvalidInput);
  c = {};
  c.pseudo_batches = 0;
  CHECK_THROWS_AS(validate(c), InvalidInput);
  CHECK(layer_sizes(TrainerConfig{}, 2) == std::vector<int>{2, 32, 32, 1});
}

TEST_CASE("enum names round trip") {
  for (auto l : {LossChoice::taylor, LossChoice::variational, LossChoice::cross_entropy_on_unlabeled}) {
    CHECK(parse_loss_choice(to_string(l)) == l);
  }
  for (auto k : {Consistency::none, Consistency::l2, Consistency::kl}) CHECK(parse_consistency(to_string(k)) == k);
  CHECK_THROWS_AS(parse_loss_choice("nnpu"), InvalidInput);
}

TEST_CASE("history shape and learning rates") {
  const auto data = make_gaussians({.n = 300, .n_labeled = 20, .seed = 2});
  const auto r = train(data, short_config(6));
  REQUIRE(r.history.size() == 6);
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    const auto& h = r.history[e];
    CHECK(h.epoch == static_cast<int>(e) + 1);
    CHECK(h.lr == doctest::Approx(1e-4 * std::pow(0.995, static_cast<double>(e))).epsilon(1e-14));
    CHECK(h.student.total == doctest::Approx(h.student.positive_part + h.student.unlabeled_part).epsilon(1e-12));
    CHECK(h.objective == doctest::Approx(h.student.total + 0.5 * h.consistency).epsilon(1e-12));
    CHECK(std::isfinite(h.objective));
    CHECK(h.teacher_metrics.tp + h.teacher_metrics.fp + h.teacher_metrics.fn + h.teacher_metrics.tn ==
          data.held_out_idx().size());
  }
}

TEST_CASE("identical seeds give identical runs") {
  const auto data = make_gaussians({.n = 300, .n_labeled = 20, .seed = 2});
  const auto a = train(data, short_config());
  const auto b = train(data, short_config());
  CHECK(flatten(a.teacher) == flatten(b.teacher));
  CHECK(a.history.back().objective == b.history.back().objective);
}

TEST_CASE("toggles") {
  const auto data = make_gaussians({.n = 300, .n_labeled = 20, .seed = 2});
  auto c = short_config(3);

  SUBCASE("without EMA the teacher never moves and the student is reported") {
    const auto r = ablation_run(data, c, {false, Consistency::none});
    const auto init = init_params(layer_sizes(c, 2), derive_seed(c.seed, "init"));
    CHECK(flatten(r.teacher) == flatten(init));
    CHECK(&r.final_metrics({false, Consistency::none}) == &r.history.back().student_metrics);
    for (const auto& h : r.history) CHECK(h.consistency == 0.0);
  }
  SUBCASE("with EMA the teacher is reported") {
    const auto r = ablation_run(data, c, {true, Consistency::l2});
    CHECK(&r.final_metrics({true, Consistency::l2}) == &r.history.back().teacher_metrics);
    CHECK(r.history.back().consistency > 0.0);
  }
  SUBCASE("beta zero leaves the student identical to the no-consistency run") {
    c.beta = 0.0;
    const auto with_kl = ablation_run(data, c, {true, Consistency::kl});
    const auto none = ablation_run(data, c, {true, Consistency::none});
    CHECK(flatten(with_kl.student) == flatten(none.student));
  }
  SUBCASE("alternative losses run") {
    c.loss = LossChoice::variational;
    CHECK_NOTHROW(train(data, c));
    c.loss = LossChoice::cross_entropy_on_unlabeled;
    CHECK_NOTHROW(train(data, c));
  }
}

TEST_CASE("evaluate predicts positive at the threshold") {
  ScorerParams p;
  p.layers.push_back({Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)});
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
  const std::vector<std::uint8_t> labels{1, 0};
  const auto m = evaluate(p, x, labels, 0.5);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
}

TEST_CASE("pseudo-batch count larger than the labeled set is rejected") {
  const auto data = make_gaussians({.n = 300, .n_labeled = 5, .seed = 2});
  CHECK_THROWS_AS(train(data, short_config()), InvalidInput);
}

TEST_CASE("non-finite objective aborts with the partial history") {
  auto data = make_gaussians({.n = 300, .n_labeled = 20, .seed = 2});
  auto c = short_config(4);
  c.optimizer.base_lr = 1e300;
  try {
    train(data, c);
    FAIL("expected NonFiniteLoss");
  } catch (const NonFiniteLoss& e) {
    CHECK(e.history().size() < 4);
  }
}
