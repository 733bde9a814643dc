#pragma once

#include <cstdint>
#include <random>

#include "types.hpp"

namespace biflab {

/// Deterministic RNG wrapper. Distribution code is hand-rolled so streams are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Derive an independent stream keyed by (seed, index), e.g. one per grid
  /// cell or sweep seed.
  static Rng keyed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over (seed, index)
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27; x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return Rng(x);
  }

  std::uint64_t bits() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::uint64_t below(std::uint64_t n) {
    // modulo bias is irrelevant at these ranges
    return gen_() % n;
  }

  /// Uniform in the closed complex disk of given radius.
  cplx in_disk(double radius) {
    double r = radius * std::sqrt(uniform());
    double phi = 2.0 * kPi * uniform();
    return std::polar(r, phi);
  }

  /// Uniform in the axis-parallel rectangle [x0,x1] x [y0,y1].
  cplx in_rect(double x0, double x1, double y0, double y1) {
    return {uniform(x0, x1), uniform(y0, y1)};
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace biflab
