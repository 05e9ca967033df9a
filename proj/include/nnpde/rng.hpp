#pragma once

#include <array>
#include <cstdint>

namespace nnpde {

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
///
/// Stream splitting: the generator for (seed, stream) is initialised by
/// running SplitMix64 from the state `seed ^ (stream * 0xD1B54A32D192ED03)`
/// and taking four consecutive outputs. Uniform doubles use the top 53 bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes a base seed with a tag and an index into a new seed. Used for
/// per-iteration resampling so that iteration k of a run is reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index = 0);

// Stream identifiers. Fixed once; changing them changes every point set.
namespace streams {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t interior = 2;
inline constexpr std::uint64_t boundary = 3;
inline constexpr std::uint64_t validation = 4;
inline constexpr std::uint64_t mesh_mc = 5;
inline constexpr std::uint64_t test_init = 6;
inline constexpr std::uint64_t lift = 7;
inline constexpr std::uint64_t cutoff = 8;
}  // namespace streams

}  // namespace nnpde
