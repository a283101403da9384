#pragma once

#include <cstdint>
#include <random>

namespace dmm {

using Rng = std::mt19937_64;

enum class StreamTag : std::uint32_t {
  kData = 1,
  kWarmStart = 2,
  kEstimator = 3,
  kBernoulli = 4,
  kInit = 5,
  kTopology = 6,
};

// Independent stream for (seed, agent, tag). Agent -1 is reserved for
// network-wide streams.
Rng make_stream(std::uint64_t seed, std::int64_t agent, StreamTag tag);

struct SeedSet {
  std::uint64_t data = 0;
  std::uint64_t estimator = 0;
  std::uint64_t bernoulli = 0;
};

// Seeds for repetition `rep` of an experiment seeded with `seed`.
SeedSet derive_seeds(std::uint64_t seed, int rep);

}  // namespace dmm
