#pragma once

#include <cstdint>
#include <random>

#include "tensorattn/dense.hpp"

namespace tensorattn {

/// Seeded generator whose draws are bit-identical on every platform
/// (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline RealMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                double hi = 1.0) {
  RealMatrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

inline ComplexMatrix random_complex_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                                           double lo = -1.0, double hi = 1.0) {
  ComplexMatrix m(rows, cols);
  for (auto& x : m.data()) {
    const double re = rng.uniform(lo, hi);
    x = complex128{re, rng.uniform(lo, hi)};
  }
  return m;
}

}  // namespace tensorattn
