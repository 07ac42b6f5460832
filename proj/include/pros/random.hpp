#pragma once

#include <cstdint>
#include <random>

namespace pros {

//! Random stream handle used by every sampler. One stream per caller; never
//! share a stream between threads.
using Rng = std::mt19937_64;

//! SplitMix64 finalizer, used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

//! Counter-based stream derivation: the stream for (seed, a, b) depends only
//! on those three numbers, never on scheduling order.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0)
{
  const std::uint64_t k = mix64(mix64(mix64(seed) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
  std::seed_seq seq{ static_cast<std::uint32_t>(k),
                     static_cast<std::uint32_t>(k >> 32),
                     static_cast<std::uint32_t>(a),
                     static_cast<std::uint32_t>(b) };
  return Rng(seq);
}

//! Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng)
{
  // 53 random bits, shifted off zero
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace pros
