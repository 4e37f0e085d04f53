#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace roomswarm {

// Every stochastic component draws from a 64-bit Mersenne Twister. Its output
// sequence is fixed by the C++ standard, and the Boost.Random distributions
// layered on top are header-only, so a seed reproduces the same trajectory on
// every conforming toolchain.
using Rng = std::mt19937_64;

/// Independent seed streams. A derived seed never collides across streams
/// with overwhelming probability.
enum class SeedStream : std::uint64_t {
  simulation = 0x51,
  table_row = 0x7a,
  study_case = 0x3c,
  smc_generation = 0x9e,
  smc_proposal = 0xd4,
  layout = 0xb1,
  null_posterior = 0x2f,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic, injective-in-practice seed for item `index` of `stream` under `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, SeedStream stream,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(stream)));
  return splitmix64(h + splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline double uniform01(Rng& rng) { return boost::random::uniform_01<double>{}(rng); }

inline double standard_normal(Rng& rng) {
  return boost::random::normal_distribution<double>{0.0, 1.0}(rng);
}

}  // namespace roomswarm
