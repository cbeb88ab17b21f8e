#pragma once

// JSON run configuration for the command-line tools. Every key is optional
// and defaults to the reference hyperparameters; unknown keys are rejected.
//
// {
//   "seed": 7,                        root seed; dataset and trainer seeds derive from it
//   "output_dir": "runs/example",
//   "dataset": {
//     "kind": "gaussians" | "moons" | "csv",
//     "n": 2000, "prior": 0.3, "separation": 4.0,   (gaussians)
//     "noise": 0.1,                                  (moons)
//     "path": "data.csv", "label_column": "label", "positive_value": "1",   (csv)
//     "labeled": 40, "unlabeled_cap": null, "standardize": false
//   },
//   "trainer": {
//     "loss": "taylor" | "variational" | "cross_entropy_on_unlabeled",
//     "order": 2, "alpha": 0.99, "beta": 0.5, "pseudo_batches": 10, "epochs": 150,
//     "lr": 1e-4, "momentum": 0.9, "weight_decay": 1e-4, "gamma": 0.995,
//     "hidden_layers": [32, 32], "threshold": 0.5,
//     "use_ema": true, "consistency": "none" | "l2" | "kl"
//   }
// }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "pulearn/data.hpp"
#include "pulearn/trainer.hpp"

namespace pulearn {

struct DatasetSpec {
  std::string kind = "gaussians";
  std::size_t n = 2000;
  double prior = 0.3;
  double separation = 4.0;
  double noise = 0.1;
  std::size_t labeled = 40;
  std::string path;
  std::string label_column = "label";
  std::string positive_value = "1";
  std::optional<std::size_t> unlabeled_cap;
  bool standardize = false;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  DatasetSpec dataset;
  TrainerConfig trainer;  // trainer.seed is ignored; see trainer_config()
};

/// Throws InvalidInput naming the offending key (e.g. "trainer.beta").
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

std::uint64_t dataset_seed(const RunConfig& cfg);
std::uint64_t trainer_seed(const RunConfig& cfg);

/// Trainer settings with the derived trainer seed filled in.
TrainerConfig trainer_config(const RunConfig& cfg);
PuDataset build_dataset(const RunConfig& cfg);

}  // namespace pulearn
