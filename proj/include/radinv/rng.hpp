#pragma once
// Deterministic seeded sampling. Substreams are derived by integer mixing so
// per-trial generators are independent of scheduling; normals come from
// Box-Muller over the raw 64-bit engine output, keeping draws bit-identical
// across platforms and thread counts.

#include <cmath>
#include <cstdint>
#include <random>

#include "types.hpp"

namespace radinv {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed of the substream addressed by (seed, salt). Chain calls for deeper
/// splits, e.g. derive_seed(derive_seed(master, check), trial).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt + 0x632be59bd9b4e019ull));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static Rng derived(std::uint64_t seed, std::uint64_t salt) {
    return Rng(derive_seed(seed, salt));
  }

  /// Uniform draw on the open interval (0, 1).
  double uniform() {
    return (double((engine_() >> 11)) + 0.5) * 0x1p-53;
  }

  /// Standard real normal.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Proper complex normal with E|z|^2 = 1 (each component variance 1/2).
  cplx cgaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-std::log(u1));
    return cplx(rad * std::cos(2.0 * M_PI * u2), rad * std::sin(2.0 * M_PI * u2));
  }

  /// Matrix of iid proper complex normals, filled row by row.
  CMat cgaussian_matrix(Index rows, Index cols) {
    CMat out(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) out(i, j) = cgaussian();
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace radinv
