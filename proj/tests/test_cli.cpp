#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pulearn/commands.hpp"
#include "pulearn/error.hpp"

using namespace pulearn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_run(const std::string& dir) {
  return parse_run_config(json{{"seed", 4},
                               {"output_dir", dir},
                               {"dataset", {{"n", 300}, {"labeled", 20}}},
                               {"trainer", {{"epochs", 3}, {"hidden_layers", {8}}}}});
}

}  // namespace

TEST_CASE("defaults mirror the reference hyperparameters") {
  const auto cfg = parse_run_config(json::object());
  CHECK(cfg.trainer.taylor_order == 2);
  CHECK(cfg.trainer.alpha == 0.99);
  CHECK(cfg.trainer.beta == 0.5);
  CHECK(cfg.trainer.pseudo_batches == 10);
  CHECK(cfg.trainer.epochs == 150);
  CHECK(cfg.trainer.optimizer.base_lr == 1e-4);
  CHECK(cfg.trainer.optimizer.momentum == 0.9);
  CHECK(cfg.trainer.optimizer.weight_decay == 1e-4);
  CHECK(cfg.trainer.optimizer.gamma == 0.995);
  CHECK(cfg.dataset.kind == "gaussians");
}

TEST_CASE("config parsing errors name the key") {
  CHECK_THROWS_WITH_AS(parse_run_config(json{{"trainer", {{"bta", 0.5}}}}), doctest::Contains("trainer.bta"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse_run_config(json{{"trainer", {{"beta", -1.0}}}}), doctest::Contains("beta"),
                       InvalidInput);
  CHECK_THROWS_WITH_AS(parse_run_config(json{{"dataset", {{"kind", "images"}}}}), doctest::Contains("dataset.kind"),
                       InvalidInput);
  CHECK_THROWS_AS(parse_run_config(json{{"trainer", {{"epochs", "many"}}}}), InvalidInput);
  CHECK_THROWS_AS(parse_run_config(json{{"oops", 1}}), InvalidInput);
  CHECK_THROWS(load_run_config("/nonexistent/config.json"));
}

TEST_CASE("config survives a JSON round trip") {
  const auto cfg = parse_run_config(json{{"seed", 9},
                                         {"dataset", {{"kind", "moons"}, {"noise", 0.2}, {"unlabeled_cap", 50}}},
                                         {"trainer", {{"loss", "variational"}, {"consistency", "l2"}, {"beta", 0.2}}}});
  const auto back = parse_run_config(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.trainer.loss == LossChoice::variational);
  CHECK(back.dataset.unlabeled_cap == std::optional<std::size_t>(50));
}

TEST_CASE("derived seeds") {
  RunConfig a, b;
  a.seed = 1;
  b.seed = 2;
  CHECK(dataset_seed(a) != trainer_seed(a));
  CHECK(dataset_seed(a) != dataset_seed(b));
  CHECK(trainer_config(a).seed == trainer_seed(a));
}

TEST_CASE("train writes artefacts and is byte-for-byte reproducible") {
  const auto a = cmd_train(small_run("cli_test/a"));
  const auto b = cmd_train(small_run("cli_test/b"));
  const auto ha = slurp(a.dir / "history.csv");
  CHECK(!ha.empty());
  CHECK(ha == slurp(b.dir / "history.csv"));
  CHECK(ha.rfind("epoch,lr,loss_total,loss_pos,loss_unl,loss_kl,student_p,student_r,student_f1,teacher_p,teacher_r,teacher_f1\n", 0) == 0);
  const auto summary = json::parse(slurp(a.dir / "summary.json"));
  CHECK(summary["status"] == "ok");
  CHECK(summary["final_model"] == "teacher");
  CHECK(summary["config"]["trainer"]["epochs"] == 3);

  std::ifstream params(a.dir / "teacher.params");
  CHECK(flatten(read_params(params)) == flatten(a.result.teacher));
}

TEST_CASE("output directory can be overridden from the environment") {
  ::setenv(kOutputDirEnv, "cli_test/env", 1);
  CHECK(resolve_output_dir(small_run("ignored")) == fs::path("cli_test/env"));
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir(small_run("cli_test/x")) == fs::path("cli_test/x"));
}

TEST_CASE("synth writes csv and sidecar") {
  const auto d = cmd_synth({.kind = "moons", .n = 120, .labeled = 10, .seed = 3, .out = "cli_test/moons.csv"});
  CHECK(fs::exists("cli_test/moons.json"));
  const auto sidecar = json::parse(slurp("cli_test/moons.json"));
  CHECK(sidecar["seed"] == 3);
  CHECK(sidecar["rows"] == 120);
  const auto back = load_csv("cli_test/moons.csv", {.n_labeled = 10, .seed = 3});
  CHECK(back.features == d.features);
  CHECK_THROWS_AS(cmd_synth({.kind = "spirals", .out = "cli_test/s.csv"}), InvalidInput);
}

TEST_CASE("sweep-order output is sorted and complete") {
  auto cfg = small_run("cli_test/sweep");
  const auto path = cmd_sweep_order(cfg, {3, 1}, {7, 5}, 2);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "order,seed,epoch,student_f1,teacher_f1");
  std::vector<std::string> keys;
  while (std::getline(in, line)) keys.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
  REQUIRE(keys.size() == 4 * 3);
  CHECK(keys.front() == "1,5");
  CHECK(keys.back() == "3,7");
  CHECK_THROWS_AS(cmd_sweep_order(cfg, {0}, {1}), InvalidInput);
}

TEST_CASE("ablation grid") {
  const auto rows = cmd_ablate(small_run("cli_test/ablate"), 2);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].order == 2);
  CHECK(rows[7].order == 5);
  CHECK(!rows[0].toggles.use_ema);
  CHECK(rows[3].toggles.consistency == Consistency::kl);
  CHECK(fs::exists("cli_test/ablate/ablation.csv"));
}

TEST_CASE("gradcheck prints a report") {
  std::ostringstream out;
  const auto r = cmd_gradcheck(1, 20, out);
  CHECK(r.cases == 20);
  CHECK(!out.str().empty());
}
