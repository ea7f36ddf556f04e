#include "stpnet/rng.hpp"

#include <bit>
#include <cmath>

namespace stpnet {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  return mix64(mix64(seed) ^ mix64(index + golden));
}

Xoroshiro128Plus::Xoroshiro128Plus(std::uint64_t seed) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = seed;
  z += golden;
  s0_ = mix64(z);
  z += golden;
  s1_ = mix64(z);
  if (s0_ == 0 && s1_ == 0) s1_ = golden;
}

Xoroshiro128Plus::result_type Xoroshiro128Plus::operator()() {
  const std::uint64_t s0 = s0_;
  std::uint64_t s1 = s1_;
  const std::uint64_t result = s0 + s1;
  s1 ^= s0;
  s0_ = std::rotl(s0, 24) ^ s1 ^ (s1 << 16);
  s1_ = std::rotl(s1, 37);
  return result;
}

double Xoroshiro128Plus::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Xoroshiro128Plus::exponential(double rate) {
  return -std::log(uniform_open0()) / rate;
}

}  // namespace stpnet
