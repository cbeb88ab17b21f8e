#include "pulearn/sampler.hpp"

#include <algorithm>
#include <string>

#include "pulearn/error.hpp"

namespace pulearn {
namespace {

std::vector<std::vector<std::size_t>> shuffled_blocks(std::span<const std::size_t> idx, std::size_t n_pb, Rng& rng) {
  std::vector<std::size_t> pool(idx.begin(), idx.end());
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t block = pool.size() / n_pb;
  std::vector<std::vector<std::size_t>> blocks;
  blocks.reserve(n_pb);
  for (std::size_t b = 0; b < n_pb; ++b) {
    auto first = pool.begin() + static_cast<std::ptrdiff_t>(b * block);
    blocks.emplace_back(first, first + static_cast<std::ptrdiff_t>(block));
  }
  return blocks;
}

}  // namespace

StratifiedEpochPlan stratify(std::span<const std::size_t> positive_idx, std::span<const std::size_t> unlabeled_idx,
                             std::size_t n_pb, Rng& rng) {
  if (n_pb == 0) throw InvalidInput("stratify: number of pseudo-batches must be positive");
  if (positive_idx.size() < n_pb || unlabeled_idx.size() < n_pb) {
    throw InvalidInput("stratify: " + std::to_string(n_pb) + " pseudo-batches need at least that many positive (" +
                       std::to_string(positive_idx.size()) + ") and unlabeled (" +
                       std::to_string(unlabeled_idx.size()) + ") samples");
  }
  auto pos_blocks = shuffled_blocks(positive_idx, n_pb, rng);
  auto unl_blocks = shuffled_blocks(unlabeled_idx, n_pb, rng);

  StratifiedEpochPlan plan;
  plan.batches.reserve(n_pb);
  for (std::size_t b = 0; b < n_pb; ++b) {
    plan.batches.push_back({std::move(pos_blocks[b]), std::move(unl_blocks[b])});
  }
  return plan;
}

}  // namespace pulearn
