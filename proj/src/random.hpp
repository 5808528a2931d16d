#pragma once

#include <cstdint>
#include <random>

namespace cryocav::detail {

// Independent streams from one user seed: 0 = kick synthesis,
// 2 = sensor noise, 3+ = Monte-Carlo trials.
inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

} // namespace cryocav::detail
