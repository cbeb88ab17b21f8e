#pragma once

// Self-calibrated teacher-student training: the student minimises the chosen
// PU loss plus beta times a consistency term against an EMA teacher, one SGD
// step and one EMA update per pseudo-batch. The teacher is the final model.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pulearn/data.hpp"
#include "pulearn/losses.hpp"
#include "pulearn/metrics.hpp"
#include "pulearn/network.hpp"

namespace pulearn {

enum class LossChoice { taylor, variational, cross_entropy_on_unlabeled };
enum class Consistency { none, l2, kl };

std::string_view to_string(LossChoice c);
std::string_view to_string(Consistency c);
LossChoice parse_loss_choice(std::string_view s);
Consistency parse_consistency(std::string_view s);

/// Which parts of the self-calibration are active. Without EMA the teacher
/// never moves and the student is the final model, so a consistency term
/// requires EMA.
struct AblationToggles {
  bool use_ema = true;
  Consistency consistency = Consistency::kl;
};

struct TrainerConfig {
  LossChoice loss = LossChoice::taylor;
  int taylor_order = 2;
  double alpha = 0.99;
  double beta = 0.5;
  std::size_t pseudo_batches = 10;
  int epochs = 150;
  OptimizerSettings optimizer;
  std::vector<int> hidden_layers{32, 32};
  std::uint64_t seed = 0;
  double threshold = 0.5;
  AblationToggles toggles;
};

/// Throws InvalidInput naming the offending field.
void validate(const TrainerConfig& config);

/// {input_dim, hidden..., 1}
std::vector<int> layer_sizes(const TrainerConfig& config, std::size_t input_dim);

struct EpochRecord {
  int epoch = 0;           // 1-based
  double lr = 0.0;         // learning rate used during this epoch
  LossBreakdown student;   // epoch mean over pseudo-batches
  double consistency = 0;  // epoch mean of the active consistency term (0 when none)
  double objective = 0;    // student.total + beta * consistency
  Metrics student_metrics;
  Metrics teacher_metrics;
};

struct TrainResult {
  ScorerParams teacher;
  ScorerParams student;
  std::vector<EpochRecord> history;

  /// Metrics of the model that provides the final predictions.
  const Metrics& final_metrics(const AblationToggles& toggles) const;
};

/// Raised when a pseudo-batch objective is not finite. Carries the epochs
/// completed before the failure.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& what, std::vector<EpochRecord> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<EpochRecord>& history() const noexcept { return history_; }

 private:
  std::vector<EpochRecord> history_;
};

/// Predict positive iff f(x) >= threshold, then score against labels.
Metrics evaluate(const ScorerParams& params, const Eigen::MatrixXd& x, std::span<const std::uint8_t> labels,
                 double threshold);

/// Evaluation uses the dataset rows outside positive_idx with their hidden labels.
TrainResult train(const PuDataset& data, const TrainerConfig& config);

/// train() with the given toggles replacing config.toggles.
TrainResult ablation_run(const PuDataset& data, const TrainerConfig& config, const AblationToggles& toggles);

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);

}  // namespace pulearn
