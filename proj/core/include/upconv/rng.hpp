#pragma once

#include <cmath>
#include <cstdint>

namespace upconv {

// splitmix64 step; used for seeding and for hashing stream keys.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna, public domain reference implementation).
// The standard <random> engines would do, but the distributions on top of
// them are implementation-defined; sampling is done with explicit inversion
// formulas below so that a (config, seed) pair reproduces byte-identical
// results on any platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64_next(sm);
  }

  // Independent substream keyed by (seed, k1, k2); used to give every
  // Monte Carlo batch its own stream so parallel schedules cannot change
  // the draw sequence.
  static RngStream derive(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0) {
    std::uint64_t sm = seed;
    std::uint64_t h = splitmix64_next(sm);
    sm = h ^ (k1 + 0x9e3779b97f4a7c15ull);
    h = splitmix64_next(sm);
    sm = h ^ (k2 + 0xbf58476d1ce4e5b9ull);
    return RngStream(splitmix64_next(sm));
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

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1); safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Poisson by sequential inversion; exact and portable for the small means
  // used throughout (pair numbers, Raman counts, dark clicks).
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    return poisson_from_uniform(mean, uniform());
  }

  // Poisson conditioned on n >= 1, by mapping the uniform past P(0).
  int poisson_at_least_one(double mean) {
    const double p0 = std::exp(-mean);
    return poisson_from_uniform(mean, p0 + uniform() * (1.0 - p0));
  }

  // Thermal (Bose-Einstein) photon-number distribution with the given mean.
  int thermal(double mean) {
    if (mean <= 0.0) return 0;
    return thermal_from_uniform(mean, uniform());
  }

  int thermal_at_least_one(double mean) {
    const double p0 = 1.0 / (1.0 + mean);
    return thermal_from_uniform(mean, p0 + uniform() * (1.0 - p0));
  }

  // Zero-mean normal draw, Box-Muller.
  double normal(double sigma) {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // Number of consecutive failures (each with probability `p_quiet`)
  // before the next success; used to skip runs of quiet pulses.
  std::uint64_t geometric_skips(double p_quiet) {
    if (p_quiet <= 0.0) return 0;
    const double k = std::floor(std::log(uniform_open()) / std::log(p_quiet));
    if (k >= 9.0e18) return 9'000'000'000'000'000'000ull;
    return static_cast<std::uint64_t>(k);
  }

  static int poisson_from_uniform(double mean, double u) {
    double p = std::exp(-mean);
    double c = p;
    int n = 0;
    while (u > c && n < 4096) {
      ++n;
      p *= mean / n;
      c += p;
    }
    return n;
  }

  static int thermal_from_uniform(double mean, double u) {
    const double r = mean / (1.0 + mean);
    double p = 1.0 / (1.0 + mean);
    double c = p;
    int n = 0;
    while (u > c && n < 65536) {
      ++n;
      p *= r;
      c += p;
    }
    return n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace upconv
