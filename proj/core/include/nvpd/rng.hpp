#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

// Self-contained random number generation. The standard <random>
// distributions are implementation-defined, so every sampler here is spelled
// out to keep seeded runs bit-identical across compilers and platforms.
//
// Stream layout: a run owns one root seed; independent streams (one per
// trace, per shot, per sweep point) are derived by hashing
// (root, kind, index) with the splitmix64 finalizer. Reordering or
// parallelizing work over streams therefore cannot change any draw.

namespace nvpd {

// splitmix64 finalizer (Steele, Lea, Flood).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t kind,
                                    std::uint64_t index) {
  std::uint64_t h = mix64(root + 0x9E3779B97F4A7C15ULL * (kind + 1));
  h = mix64(h ^ (0xBF58476D1CE4E5B9ULL * (index + 1)));
  return h;
}

// Stream kinds used by the simulators.
namespace stream {
inline constexpr std::uint64_t kTrace = 1;
inline constexpr std::uint64_t kDetectionShot = 2;
inline constexpr std::uint64_t kCorrelatedShot = 3;
inline constexpr std::uint64_t kSweep = 4;
}  // namespace stream

// xoshiro256++ (Blackman & Vigna, public domain reference implementation),
// seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9E3779B97F4A7C15ULL;
      word = mix64(s);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_open() { return 1.0 - uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponential waiting time, mean 1/rate.
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  // Exact Poisson sample: counts arrivals of a unit-rate process until the
  // accumulated waiting time exceeds `mean`. O(mean) draws, no overflow,
  // exact for any mean; the means in this project stay small enough that
  // the linear cost is irrelevant.
  std::uint32_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    double acc = 0.0;
    std::uint32_t k = 0;
    for (;;) {
      acc += -std::log(uniform_open());
      if (acc > mean) return k;
      ++k;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

inline Rng derived_rng(std::uint64_t root, std::uint64_t kind,
                       std::uint64_t index) {
  return Rng(derive_seed(root, kind, index));
}

}  // namespace nvpd
