#pragma once

// Global proportional random stratified sampling: every pseudo-batch carries a
// fixed quota of labeled-positive and unlabeled indices.

#include <cstddef>
#include <span>
#include <vector>

#include "pulearn/seeding.hpp"

namespace pulearn {

struct PseudoBatch {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> unlabeled;
};

struct StratifiedEpochPlan {
  std::vector<PseudoBatch> batches;
};

/// Shuffles each class independently and cuts it into blocks of
/// floor(N_k / n_pb). Exactly n_pb batches are emitted; the N_k mod n_pb
/// leftover indices of each class sit out this epoch.
///
/// Throws InvalidInput when n_pb is zero or exceeds either class size.
StratifiedEpochPlan stratify(std::span<const std::size_t> positive_idx, std::span<const std::size_t> unlabeled_idx,
                             std::size_t n_pb, Rng& rng);

}  // namespace pulearn
