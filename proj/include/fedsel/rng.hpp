#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fedsel {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for a named sub-stream (e.g. "data", "channel") of trial `index` under `master`.
// Different (master, index, tag) triples give statistically unrelated streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::string_view tag) noexcept;

inline Rng make_rng(std::uint64_t master, std::uint64_t index, std::string_view tag) {
  return Rng(derive_seed(master, index, tag));
}

}  // namespace fedsel
