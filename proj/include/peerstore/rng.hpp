#pragma once

// Deterministic, platform-independent random source (xoshiro256++ seeded
// through splitmix64). Every stochastic component draws through this type so
// that a run is reproducible bit-for-bit for a fixed seed, independent of
// standard-library distribution implementations.

#include <cmath>
#include <cstdint>
#include <span>

namespace peerstore {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0,n), unbiased (rejection of the wrap-around range).
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t u = next_u64();
      if (u >= threshold) return u % n;
    }
  }

  // rate > 0 required.
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // Index sampled proportionally to nonnegative weights; one uniform draw,
  // cumulative scan in index order. total must be the sum of weights (> 0).
  int pick_weighted(std::span<const double> weights, double total) {
    const double u = uniform01() * total;
    double acc = 0.0;
    int last_positive = 0;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;  // guards against rounding at the top of the scale
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t state_[4];
};

// Stable per-replica stream derivation.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0xD1B54A32D192ED03ull * (index + 1));
  return splitmix64(s);
}

}  // namespace peerstore
