#pragma once

// Library side of the `pulearn` command-line tool. Each command writes its
// CSV/JSON artefacts and returns what it produced so tests can call it
// without spawning a process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pulearn/oracle.hpp"
#include "pulearn/run_config.hpp"
#include "pulearn/trainer.hpp"

namespace pulearn {

/// Environment variable that, when set, replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "PULEARN_OUTPUT_DIR";

std::filesystem::path resolve_output_dir(const RunConfig& cfg);

struct SynthOptions {
  std::string kind = "gaussians";  // gaussians | moons
  std::size_t n = 1000;
  double prior = 0.3;
  double separation = 4.0;
  double noise = 0.1;
  std::size_t labeled = 40;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

/// Writes the dataset CSV to opts.out and a JSON sidecar (same stem, .json)
/// recording the generator parameters and seed.
PuDataset cmd_synth(const SynthOptions& opts);

/// epoch,lr,loss_total,loss_pos,loss_unl,loss_kl,student_p,student_r,student_f1,teacher_p,teacher_r,teacher_f1
/// loss_total is the full student objective loss_pos + loss_unl + beta * loss_kl.
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

struct TrainOutputs {
  std::filesystem::path dir;
  TrainResult result;
};

/// history.csv, summary.json, teacher.params and student.params in the output directory.
TrainOutputs cmd_train(const RunConfig& cfg);

/// sweep_order.csv with columns order,seed,epoch,student_f1,teacher_f1.
/// Each seed replaces the root seed; cells run on up to `threads` workers and
/// rows are sorted by (order, seed, epoch).
std::filesystem::path cmd_sweep_order(const RunConfig& cfg, const std::vector<int>& orders,
                                      const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

struct AblationRow {
  int order = 0;
  AblationToggles toggles;
  Metrics final_metrics;  // teacher with EMA, otherwise student
};

/// Runs {no-EMA/none, EMA/none, EMA/l2, EMA/kl} x orders {2, 5} with the Taylor
/// loss and writes ablation.csv (order,use_ema,consistency,final_model,precision,recall,f1).
std::vector<AblationRow> cmd_ablate(const RunConfig& cfg, unsigned threads = 0);

/// Runs the oracle suite, prints the report, returns it.
oracle::SuiteReport cmd_gradcheck(std::uint64_t seed, std::size_t cases, std::ostream& out);

}  // namespace pulearn
