#include "dmm/rng.hpp"

namespace dmm {

namespace {

std::uint32_t low(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); }
std::uint32_t high(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

std::uint64_t mix(std::uint64_t seed, std::uint32_t a, std::uint32_t b) {
  std::seed_seq seq{low(seed), high(seed), a, b};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::int64_t agent, StreamTag tag) {
  const auto a = static_cast<std::uint64_t>(agent);
  std::seed_seq seq{low(seed), high(seed), low(a), high(a), static_cast<std::uint32_t>(tag)};
  return Rng(seq);
}

SeedSet derive_seeds(std::uint64_t seed, int rep) {
  const auto r = static_cast<std::uint32_t>(rep);
  return {mix(seed, r, 0x0da7a), mix(seed, r, 0xe571), mix(seed, r, 0xbe41)};
}

}  // namespace dmm
