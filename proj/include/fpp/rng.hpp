#pragma once

#include <cstdint>
#include <random>

namespace fpp {

// SplitMix64 finalizer. Derives per-replica / per-purpose seeds from a master
// seed so results do not depend on how work is scheduled across workers.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic generator. All variate code is written out here (uniforms via
// the 53-bit ldexp trick, Poisson by inversion) so byte-identical replay does
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Uniform on {0, 1, ..., n-1}, unbiased via rejection.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Exact Poisson sample by CDF inversion. Means above 16 are split into
  // chunks (Poisson additivity) so e^{-mean} never underflows.
  int64_t poisson(double mean) {
    int64_t total = 0;
    while (mean > 16.0) {
      total += poisson_small(16.0);
      mean -= 16.0;
    }
    return total + poisson_small(mean);
  }

 private:
  int64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double u = uniform01();
    double p = std::exp(-mean);
    double cum = p;
    int64_t k = 0;
    while (u >= cum) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
      if (k > 4096) break;  // unreachable for mean <= 16; guards a stuck loop
    }
    return k;
  }

  std::mt19937_64 eng_;
};

}  // namespace fpp
