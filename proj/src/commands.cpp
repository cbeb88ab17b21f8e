#include "pulearn/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <thread>

#include "pulearn/error.hpp"

namespace pulearn {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
}

json metrics_json(const Metrics& m) {
  return {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
          {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"oa", m.oa}};
}

// Runs task(i) for i in [0, n) on a small pool; results are placed by index so
// the caller's output order never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

fs::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return fs::path(env);
  return fs::path(cfg.output_dir);
}

PuDataset cmd_synth(const SynthOptions& opts) {
  if (opts.out.empty()) throw InvalidInput("synth: an output path is required");
  PuDataset data;
  json params;
  if (opts.kind == "gaussians") {
    data = make_gaussians({.n = opts.n, .prior = opts.prior, .separation = opts.separation,
                           .n_labeled = opts.labeled, .seed = opts.seed});
    params = {{"n", opts.n}, {"prior", opts.prior}, {"separation", opts.separation}, {"labeled", opts.labeled}};
  } else if (opts.kind == "moons") {
    data = make_two_moons({.n = opts.n, .noise = opts.noise, .n_labeled = opts.labeled, .seed = opts.seed});
    params = {{"n", opts.n}, {"noise", opts.noise}, {"labeled", opts.labeled}};
  } else {
    throw InvalidInput("synth: kind must be gaussians or moons, got '" + opts.kind + "'");
  }
  {
    auto out = open_for_write(opts.out);
    write_csv(out, data);
  }
  fs::path sidecar = opts.out;
  sidecar.replace_extension(".json");
  write_json(sidecar, {{"kind", opts.kind},
                       {"seed", opts.seed},
                       {"params", params},
                       {"rows", data.size()},
                       {"hidden_positives", std::count(data.hidden_labels.begin(), data.hidden_labels.end(), 1)},
                       {"labeled_positive_indices", data.positive_idx}});
  return data;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,lr,loss_total,loss_pos,loss_unl,loss_kl,student_p,student_r,student_f1,teacher_p,teacher_r,teacher_f1\n";
  out << std::setprecision(17);
  for (const auto& r : history) {
    out << r.epoch << ',' << r.lr << ',' << r.objective << ',' << r.student.positive_part << ','
        << r.student.unlabeled_part << ',' << r.consistency << ',' << r.student_metrics.precision << ','
        << r.student_metrics.recall << ',' << r.student_metrics.f1 << ',' << r.teacher_metrics.precision << ','
        << r.teacher_metrics.recall << ',' << r.teacher_metrics.f1 << '\n';
  }
}

TrainOutputs cmd_train(const RunConfig& cfg) {
  const fs::path dir = resolve_output_dir(cfg);
  const PuDataset data = build_dataset(cfg);
  const TrainerConfig tc = trainer_config(cfg);

  json summary = {{"config", to_json(cfg)},
                  {"derived_seeds", {{"dataset", dataset_seed(cfg)}, {"trainer", tc.seed}}},
                  {"dataset", {{"name", data.name}, {"rows", data.size()}, {"dim", data.dim()},
                               {"labeled", data.positive_idx.size()}, {"unlabeled", data.unlabeled_idx.size()}}}};

  TrainOutputs outputs{dir, {}};
  try {
    outputs.result = train(data, tc);
  } catch (const NonFiniteLoss& e) {
    auto out = open_for_write(dir / "history.csv");
    write_history_csv(out, e.history());
    summary["status"] = "aborted";
    summary["error"] = e.what();
    summary["epochs_completed"] = e.history().size();
    write_json(dir / "summary.json", summary);
    throw;
  }
  const TrainResult& r = outputs.result;
  {
    auto out = open_for_write(dir / "history.csv");
    write_history_csv(out, r.history);
  }
  {
    auto out = open_for_write(dir / "teacher.params");
    write_params(out, r.teacher);
  }
  {
    auto out = open_for_write(dir / "student.params");
    write_params(out, r.student);
  }
  summary["status"] = "ok";
  summary["epochs_completed"] = r.history.size();
  summary["final_model"] = tc.toggles.use_ema ? "teacher" : "student";
  summary["final"] = metrics_json(r.final_metrics(tc.toggles));
  summary["final_teacher"] = metrics_json(r.history.back().teacher_metrics);
  summary["final_student"] = metrics_json(r.history.back().student_metrics);
  write_json(dir / "summary.json", summary);
  return outputs;
}

fs::path cmd_sweep_order(const RunConfig& cfg, const std::vector<int>& orders, const std::vector<std::uint64_t>& seeds,
                         unsigned threads) {
  if (orders.empty()) throw InvalidInput("sweep-order: order list is empty");
  if (seeds.empty()) throw InvalidInput("sweep-order: seed list is empty");
  for (int o : orders) {
    if (o < 1) throw InvalidInput("sweep-order: orders must be >= 1");
  }

  struct Cell {
    int order;
    std::uint64_t seed;
    std::vector<EpochRecord> history;
  };
  std::vector<Cell> cells;
  for (int o : orders) {
    for (auto s : seeds) cells.push_back({o, s, {}});
  }
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    RunConfig c = cfg;
    c.seed = cells[i].seed;
    c.trainer.loss = LossChoice::taylor;
    c.trainer.taylor_order = cells[i].order;
    cells[i].history = train(build_dataset(c), trainer_config(c)).history;
  });
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return std::tie(a.order, a.seed) < std::tie(b.order, b.seed); });

  const fs::path path = resolve_output_dir(cfg) / "sweep_order.csv";
  auto out = open_for_write(path);
  out << "order,seed,epoch,student_f1,teacher_f1\n" << std::setprecision(17);
  for (const auto& c : cells) {
    for (const auto& r : c.history) {
      out << c.order << ',' << c.seed << ',' << r.epoch << ',' << r.student_metrics.f1 << ',' << r.teacher_metrics.f1
          << '\n';
    }
  }
  return path;
}

std::vector<AblationRow> cmd_ablate(const RunConfig& cfg, unsigned threads) {
  const std::vector<AblationToggles> grid{{false, Consistency::none},
                                          {true, Consistency::none},
                                          {true, Consistency::l2},
                                          {true, Consistency::kl}};
  std::vector<AblationRow> rows;
  for (int order : {2, 5}) {
    for (const auto& t : grid) rows.push_back({order, t, {}});
  }
  const PuDataset data = build_dataset(cfg);
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    TrainerConfig tc = trainer_config(cfg);
    tc.loss = LossChoice::taylor;
    tc.taylor_order = rows[i].order;
    const TrainResult r = ablation_run(data, tc, rows[i].toggles);
    rows[i].final_metrics = r.final_metrics(rows[i].toggles);
  });

  auto out = open_for_write(resolve_output_dir(cfg) / "ablation.csv");
  out << "order,use_ema,consistency,final_model,precision,recall,f1\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.order << ',' << (r.toggles.use_ema ? 1 : 0) << ',' << to_string(r.toggles.consistency) << ','
        << (r.toggles.use_ema ? "teacher" : "student") << ',' << r.final_metrics.precision << ','
        << r.final_metrics.recall << ',' << r.final_metrics.f1 << '\n';
  }
  return rows;
}

oracle::SuiteReport cmd_gradcheck(std::uint64_t seed, std::size_t cases, std::ostream& out) {
  const oracle::SuiteReport report = oracle::run_suite(seed, cases);
  out << oracle::format_report(report);
  return report;
}

}  // namespace pulearn
