#pragma once

#include <cstdint>
#include <random>

namespace semsym {

using Rng = std::mt19937_64;

/// Independent, reproducible generator for (seed, stream).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5e3a5f1du};
  return Rng(seq);
}

/// Named streams so independent consumers of one seed never share draws.
namespace stream {
inline constexpr std::uint64_t normal = 1;
inline constexpr std::uint64_t chi_square = 2;
inline constexpr std::uint64_t channel = 3;
inline constexpr std::uint64_t bootstrap = 4;
inline constexpr std::uint64_t init = 5;
inline constexpr std::uint64_t source = 6;
inline constexpr std::uint64_t eval = 7;
inline constexpr std::uint64_t perturb = 8;
}  // namespace stream

}  // namespace semsym
