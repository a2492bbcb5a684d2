#pragma once

#include <cstdint>
#include <cmath>

namespace smim {

// Deterministic, portable random streams. The standard <random> distributions
// are implementation-defined, so everything here is hand-rolled: xoshiro256++
// for bits, Box-Muller for normals, Marsaglia-Tsang for gamma. Streams are
// derived from (seed, key...) with a SplitMix64 mixer, so per-sample / per-trial
// substreams are independent of thread scheduling.

inline uint64_t splitmix64(uint64_t& s) {
  uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_keys(uint64_t seed, uint64_t k1 = 0, uint64_t k2 = 0, uint64_t k3 = 0) {
  uint64_t s = seed;
  uint64_t h = splitmix64(s);
  s ^= k1 + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= k2 + 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix64(s);
  s ^= k3 + 0x165667b19e3779f9ULL;
  h ^= splitmix64(s);
  return h;
}

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) {
    uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  // Derived substream; identical regardless of call order elsewhere.
  static Rng stream(uint64_t seed, uint64_t k1, uint64_t k2 = 0, uint64_t k3 = 0) {
    return Rng(mix_keys(seed, k1, k2, k3));
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

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1]; safe as a log() argument.
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  uint64_t below(uint64_t n) {  // unbiased integer in [0, n)
    const uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do { x = next_u64(); } while (x >= lim);
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u = uniform_pos();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Gamma(alpha, 1), alpha > 0.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      const double u = uniform_pos();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // chi_d-distributed radius: sqrt of a chi^2_d = Gamma(d/2, scale 2) draw.
  double chi(int d) { return std::sqrt(2.0 * gamma(0.5 * static_cast<double>(d))); }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smim
