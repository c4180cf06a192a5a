#pragma once

#include <cstdint>

namespace nfl {

// Counter-based splitmix64 stream. A generator is fully determined by the
// pair (seed, stream); concurrent work units each own a disjoint stream, so
// results never depend on thread count or execution order.
class SplitMix64 {
 public:
  SplitMix64() : state_(mix(0x9E3779B97F4A7C15ULL)) {}

  SplitMix64(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(seed ^ mix(0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 random bits. Hand-rolled so output is
  // identical across standard libraries.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform over {0, 1, 2}. Rejection sampling keeps the three outcomes
  // exactly equiprobable.
  int trit() {
    // 2^64 - 1 is divisible by 3, so only the single top value is rejected.
    for (;;) {
      std::uint64_t u = next();
      if (u != ~0ULL) return static_cast<int>(u % 3);
    }
  }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~0ULL) / bound);
    for (;;) {
      std::uint64_t u = next();
      if (u < limit) return u % bound;
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace nfl
