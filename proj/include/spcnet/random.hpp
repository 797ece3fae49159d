#pragma once

#include <cstdint>
#include <random>

namespace spcnet {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Streams separate the uses of one
/// run seed (graph sampling, splitting, initialization, dropout, ...).
enum class Stream : std::uint32_t { Sbm = 1, Split, Init, Dropout, Perturb, Probe };

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline double uniform01(Rng& gen) { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); }

}  // namespace spcnet
