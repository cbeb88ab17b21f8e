// pulearn: class-prior-free PU learning experiments.
//
//   pulearn synth gaussians --n 1000 --prior 0.3 --labeled 40 --seed 7 --out data.csv
//   pulearn train --config configs/gaussians_40.json [--loss variational] [--beta 0.2] ...
//   pulearn sweep-order --config cfg.json --orders 1,2,3,4,5 --seeds 1,2,3
//   pulearn ablate --config cfg.json
//   pulearn gradcheck [--cases 1000] [--seed 1]
//
// On failure a single JSON line {"error": kind, "message": text} goes to
// stderr and the exit code is non-zero.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pulearn/commands.hpp"
#include "pulearn/error.hpp"

namespace {

using namespace pulearn;

struct TrainerOverrides {
  std::optional<std::string> loss;
  std::optional<int> order;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> epochs;
  std::optional<std::size_t> pseudo_batches;
  std::optional<double> lr;
  std::optional<double> momentum;
  std::optional<double> weight_decay;
  std::optional<double> gamma;
  std::optional<std::string> consistency;
  std::optional<bool> use_ema;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

void add_overrides(CLI::App* app, std::string& config_path, TrainerOverrides& o) {
  app->add_option("--config", config_path, "JSON run configuration (defaults used when omitted)");
  app->add_option("--loss", o.loss, "taylor | variational | cross_entropy_on_unlabeled");
  app->add_option("--order", o.order, "Taylor order");
  app->add_option("--alpha", o.alpha, "EMA smoothing factor");
  app->add_option("--beta", o.beta, "consistency weight");
  app->add_option("--epochs", o.epochs);
  app->add_option("--pseudo-batches", o.pseudo_batches);
  app->add_option("--lr", o.lr);
  app->add_option("--momentum", o.momentum);
  app->add_option("--weight-decay", o.weight_decay);
  app->add_option("--gamma", o.gamma, "per-epoch learning-rate decay");
  app->add_option("--consistency", o.consistency, "none | l2 | kl");
  app->add_option("--use-ema", o.use_ema, "true | false");
  app->add_option("--seed", o.seed, "root seed");
  app->add_option("--output-dir", o.output_dir);
}

RunConfig resolve_config(const std::string& path, const TrainerOverrides& o) {
  nlohmann::json doc = path.empty() ? nlohmann::json::object() : to_json(load_run_config(path));
  auto& t = doc["trainer"];
  if (!t.is_object()) t = nlohmann::json::object();
  if (o.loss) t["loss"] = *o.loss;
  if (o.order) t["order"] = *o.order;
  if (o.alpha) t["alpha"] = *o.alpha;
  if (o.beta) t["beta"] = *o.beta;
  if (o.epochs) t["epochs"] = *o.epochs;
  if (o.pseudo_batches) t["pseudo_batches"] = *o.pseudo_batches;
  if (o.lr) t["lr"] = *o.lr;
  if (o.momentum) t["momentum"] = *o.momentum;
  if (o.weight_decay) t["weight_decay"] = *o.weight_decay;
  if (o.gamma) t["gamma"] = *o.gamma;
  if (o.consistency) t["consistency"] = *o.consistency;
  if (o.use_ema) t["use_ema"] = *o.use_ema;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.output_dir) doc["output_dir"] = *o.output_dir;
  return parse_run_config(doc);
}

int fail(const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-prior-free PU learning with the Taylor variational loss"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic PU dataset as CSV");
  synth_cmd->add_option("kind", synth.kind, "gaussians | moons")->required();
  synth_cmd->add_option("--n", synth.n);
  synth_cmd->add_option("--prior", synth.prior, "positive probability (gaussians)");
  synth_cmd->add_option("--separation", synth.separation, "blob centre distance (gaussians)");
  synth_cmd->add_option("--noise", synth.noise, "jitter (moons)");
  synth_cmd->add_option("--labeled", synth.labeled);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth.out)->required();

  std::string config_path;
  TrainerOverrides overrides;
  auto* train_cmd = app.add_subcommand("train", "run self-calibrated training");
  add_overrides(train_cmd, config_path, overrides);

  std::vector<int> orders;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep-order", "F1 trajectories over Taylor orders and seeds");
  add_overrides(sweep_cmd, config_path, overrides);
  sweep_cmd->add_option("--orders", orders)->delimiter(',')->required();
  sweep_cmd->add_option("--seeds", seeds)->delimiter(',');
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* ablate_cmd = app.add_subcommand("ablate", "EMA / consistency ablation grid at orders 2 and 5");
  add_overrides(ablate_cmd, config_path, overrides);
  ablate_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  std::uint64_t check_seed = 1;
  std::size_t check_cases = 1000;
  auto* grad_cmd = app.add_subcommand("gradcheck", "run the oracle suite and print worst deviations");
  grad_cmd->add_option("--seed", check_seed);
  grad_cmd->add_option("--cases", check_cases);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*synth_cmd) {
      const PuDataset d = cmd_synth(synth);
      std::cout << "wrote " << d.size() << " rows to " << synth.out.string() << '\n';
    } else if (*train_cmd) {
      const auto out = cmd_train(resolve_config(config_path, overrides));
      const auto& last = out.result.history.back();
      std::cout << "epochs " << out.result.history.size() << "  teacher F1 " << last.teacher_metrics.f1
                << "  student F1 " << last.student_metrics.f1 << "  -> " << out.dir.string() << '\n';
    } else if (*sweep_cmd) {
      RunConfig cfg = resolve_config(config_path, overrides);
      if (seeds.empty()) seeds.push_back(cfg.seed);
      std::cout << "wrote " << cmd_sweep_order(cfg, orders, seeds, threads).string() << '\n';
    } else if (*ablate_cmd) {
      for (const auto& r : cmd_ablate(resolve_config(config_path, overrides), threads)) {
        std::cout << "order " << r.order << "  ema " << (r.toggles.use_ema ? "yes" : "no ") << "  consistency "
                  << to_string(r.toggles.consistency) << "  F1 " << r.final_metrics.f1 << '\n';
      }
    } else if (*grad_cmd) {
      cmd_gradcheck(check_seed, check_cases, std::cout);
    }
  } catch (const NonFiniteLoss& e) {
    return fail("non_finite_loss", e.what());
  } catch (const InvalidInput& e) {
    return fail("invalid_input", e.what());
  } catch (const ParseError& e) {
    return fail("parse_error", e.what());
  } catch (const OracleError& e) {
    return fail("oracle_error", e.what());
  } catch (const std::exception& e) {
    return fail("error", e.what());
  }
  return 0;
}
