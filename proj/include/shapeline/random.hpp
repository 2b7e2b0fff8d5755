#pragma once

// Seeded randomness.
//
// Every random stream is an std::mt19937_64 whose seed is derived from the
// run seed with `derive_seed(seed, stream, index)`:
//
//   mix(z)  = splitmix64 finalizer of z
//   derive  = mix(mix(seed + 0x9E3779B97F4A7C15 * (stream + 1)) + index)
//
// `stream` names the purpose (points, model randomness, cell choice, ...) and
// `index` is normally the replicate id. The engine is fully specified by the
// C++ standard, uniform variates use the top 53 bits of one engine draw, and
// Poisson counts come from boost::random (PTRS), so runs are reproducible
// across machines.

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/poisson_distribution.hpp>

namespace shapeline {

using Engine = std::mt19937_64;

namespace stream {
inline constexpr std::uint64_t points = 0;
inline constexpr std::uint64_t model = 1;
inline constexpr std::uint64_t cells = 2;
inline constexpr std::uint64_t sampling = 3;
inline constexpr std::uint64_t synthetic = 4;
inline constexpr std::uint64_t estimate = 5;
}  // namespace stream

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1)) + index);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t index) {
  return Engine{derive_seed(seed, stream_id, index)};
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

inline double uniform(Engine& eng, double lo, double hi) { return lo + (hi - lo) * uniform01(eng); }

inline double exponential(Engine& eng, double mean) { return -mean * std::log1p(-uniform01(eng)); }

/// Uniform index in [0, n), n > 0.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(eng) * static_cast<double>(n)) % n;
}

inline std::uint64_t poisson(Engine& eng, double mean) {
  if (mean <= 0.0) return 0;
  boost::random::poisson_distribution<std::uint64_t, double> dist(mean);
  return dist(eng);
}

inline bool bernoulli(Engine& eng, double p) { return uniform01(eng) < p; }

}  // namespace shapeline
