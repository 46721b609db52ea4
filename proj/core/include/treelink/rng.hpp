#pragma once

#include <cstdint>

namespace treelink {

/// SplitMix64 stream. Small, fast, and identical on every platform, which
/// matters here: estimates must be bit-for-bit reproducible across runs and
/// worker counts, so we avoid std:: distribution implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_unit() < p; }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from (seed, index); used to give each
/// Monte Carlo sample its own stream so partitioning over workers cannot
/// change results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return mix.next();
}

}  // namespace treelink
