#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace retree {

// Deterministic RNG streams. A master seed plus a stream index give an
// independent engine; replicate k of a simulation always uses stream k, so
// results do not depend on thread scheduling.
//
// All variate transforms are implemented here instead of <random>'s
// distributions, whose output sequences are implementation-defined. The
// mt19937_64 engine itself is pinned by the standard, so a fixed seed yields
// identical draws on any conforming platform.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Stream `k` derived from `master`; distinct k give decorrelated engines.
  static Rng stream(std::uint64_t master, std::uint64_t k) {
    return Rng(splitmix64(master ^ splitmix64(k + 1)));
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1).
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  // Exp(1). -log1p(-u) is exact near u = 0 and never sees log(0).
  double exponential() { return -std::log1p(-uniform()); }

  // Knuth's product method; fine for the small means used here.
  std::uint64_t poisson(double mean) {
    double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 eng_;
};

// First arrival of an inhomogeneous Poisson process whose rate starts at
// x >= 0 and grows with unit slope. Inverts x g + g^2/2 = E in the form that
// stays accurate for large x, where the naive root cancels.
inline double ramp_gap(double x, Rng& rng) {
  double e = rng.exponential();
  return 2.0 * e / (x + std::sqrt(x * x + 2.0 * e));
}

}  // namespace retree
