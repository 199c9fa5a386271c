#pragma once
// Shared generators and assertion helpers for the test suite.

#include <catch2/catch_amalgamated.hpp>

#include <radinv/rng.hpp>
#include <radinv/types.hpp>

namespace testutil {

using radinv::CMat;
using radinv::cplx;
using radinv::CVec;
using radinv::Index;
using radinv::RVec;

inline CMat random_cmat(Index rows, Index cols, std::uint64_t seed) {
  radinv::Rng rng(seed);
  return rng.cgaussian_matrix(rows, cols);
}

inline CMat random_pd(Index n, std::uint64_t seed) {
  const CMat a = random_cmat(n, n, seed);
  return radinv::hermitized(a * a.adjoint() + CMat::Identity(n, n));
}

template <typename Fn>
void expect_error(radinv::Errc want, Fn&& fn) {
  try {
    fn();
  } catch (const radinv::Error& e) {
    INFO(e.what());
    REQUIRE(e.code() == want);
    return;
  }
  FAIL("expected an error, none was thrown");
}

}  // namespace testutil
