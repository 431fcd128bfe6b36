// Seeded random number generation for reproducible Monte-Carlo runs.
//
// The generator is xoshiro256++ (Blackman & Vigna), state-initialized from a
// 64-bit seed through splitmix64.  Standard normals come from Box-Muller.
// Fixing the generator in the repository keeps simulation output bit-stable
// across platforms and compiler versions, which std::mt19937 +
// std::normal_distribution does not guarantee.
#pragma once

#include <cmath>
#include <cstdint>

#include "mrkf/linalg.hpp"

namespace mrkf {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// xoshiro256++ with Box-Muller normal sampling.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  /// Generator for an individual Monte-Carlo run, decorrelated from other
  /// runs under the same master seed.
  static Xoshiro256 for_run(std::uint64_t master_seed, std::uint64_t run_index) {
    std::uint64_t sm = master_seed;
    const std::uint64_t base = detail::splitmix64(sm);
    return Xoshiro256(base ^ (0xD1342543DE82EF95ULL * (run_index + 1)));
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

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; generates in pairs and caches the spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Vector of independent standard normals.
  Vector normal_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal();
    return v;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mrkf
