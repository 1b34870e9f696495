#pragma once

// Seeding helpers. All randomness in the library flows from a master seed
// through derive_seed(), so a run is a pure function of its configuration and
// restarts can be computed in any order.

#include <cstdint>
#include <random>

namespace mcqsgd {

using Rng = std::mt19937_64;

/// Named seed streams; values are part of the reproducibility contract.
enum class SeedStream : std::uint64_t {
  kTrainIcs = 1,
  kTestIcs = 2,
  kProbing = 3,
  kTheta0 = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ index);
}

/// Uniform draw in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution the mapping is fixed across standard
/// libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform draw in the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  double u = 0.0;
  while (u == 0.0) u = uniform01(rng);
  return u;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace mcqsgd
