#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pulearn {

using Rng = std::mt19937_64;

/// Deterministic child seed for a named purpose ("init", "sampler", ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace pulearn
