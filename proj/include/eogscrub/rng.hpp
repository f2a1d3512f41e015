#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace eogscrub {

// All randomness in the project flows through this generator so that results
// are reproducible bit-for-bit across platforms. The standard <random>
// distributions are implementation-defined, so they are not used anywhere.

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Mixes a base seed with stream tags (e.g. subject and channel indices) into
// an independent stream seed.
inline uint64_t derive_seed(uint64_t base, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = base;
  splitmix64_next(s);
  s ^= 0xd1b54a32d192ed03ull + a;
  splitmix64_next(s);
  s ^= 0x8cb92ba72f3d8dd7ull + b;
  splitmix64_next(s);
  s ^= 0xaef17502108ef2d9ull + c;
  return splitmix64_next(s);
}

// xoshiro256++ (Blackman & Vigna), seeded via splitmix64.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53 bits of precision.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n). Lemire multiply-shift; the O(2^-64) bias is
  // irrelevant here and the sequence stays platform-independent.
  uint64_t below(uint64_t n) {
    return uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = static_cast<decltype(i)>(below(uint64_t(i) + 1));
      std::swap(first[i], first[j]);
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stream tags for derive_seed, so distinct consumers of one run seed never
// collide.
enum class RngStream : uint64_t {
  kSplit = 1,
  kPureEeg = 2,
  kEog = 3,
  kWeightInit = 4,
  kFit = 5,
};

inline uint64_t derive_seed(uint64_t base, RngStream stream, uint64_t a = 0, uint64_t b = 0) {
  return derive_seed(base, static_cast<uint64_t>(stream), a, b);
}

}  // namespace eogscrub
