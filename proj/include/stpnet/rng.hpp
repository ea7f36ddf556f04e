#pragma once

#include <cstdint>
#include <limits>

namespace stpnet {

/// SplitMix64 finaliser: a bijective avalanche on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Seed for replica stream `index` under master seed `seed`:
/// mix64(mix64(seed) ^ mix64(index + golden)). Distinct (seed, index) pairs
/// give unrelated streams; the derivation does not depend on thread layout.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// xoroshiro128+ (Blackman & Vigna). State is filled from a 64-bit seed by
/// running SplitMix64, so every seed (including 0) gives a valid state.
/// Satisfies std::uniform_random_bit_generator.
class Xoroshiro128Plus {
 public:
  using result_type = std::uint64_t;

  explicit Xoroshiro128Plus(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) from the top 53 bits (the low bits of the '+'
  /// scrambler are weak and are discarded).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  /// Exponential with the given rate (> 0).
  double exponential(double rate);

 private:
  std::uint64_t s0_;
  std::uint64_t s1_;
};

/// Generator for replica `index` of a study seeded with `seed`.
inline Xoroshiro128Plus replica_rng(std::uint64_t seed, std::uint64_t index) {
  return Xoroshiro128Plus(stream_seed(seed, index));
}

}  // namespace stpnet
