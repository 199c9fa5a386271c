#pragma once
// Complex-matrix kernels shared by every statistic: QR with a fixed sign
// convention, deterministic unitary completion, SVD, Hermitian square roots,
// trailing-block Schur complements and ordered Hermitian eigendecompositions.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "types.hpp"

namespace radinv::linalg {

struct QrResult {
  CMat q;  // thin, orthonormal columns
  CMat r;  // upper triangular, strictly positive real diagonal
};

/// Thin QR of a full-column-rank matrix. The positive real diagonal of R pins
/// the column phases, making the factorization unique.
inline QrResult qr_decompose(const CMat& a, double rank_tol = 1e-8) {
  const Index n = a.rows();
  const Index j = a.cols();
  require(j <= n, Errc::RankDeficient, "qr_decompose: more columns than rows");
  if (j == 0) return {CMat::Zero(n, 0), CMat::Zero(0, 0)};

  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ() * CMat::Identity(n, j);
  CMat r = qr.matrixQR().topRows(j).triangularView<Eigen::Upper>();

  const double scale = a.norm();
  for (Index i = 0; i < j; ++i) {
    const double mag = std::abs(r(i, i));
    require(mag > rank_tol * scale, Errc::RankDeficient,
            "qr_decompose: column " + std::to_string(i) + " numerically dependent");
    const cplx phase = r(i, i) / mag;
    r.row(i) *= std::conj(phase);
    q.col(i) *= phase;
  }
  return {std::move(q), std::move(r)};
}

/// Extend an isometry to a square unitary. The input columns are returned
/// unchanged in the leading positions; the complement comes from the
/// Householder factorization of the input, so the result is deterministic.
inline CMat unitary_completion(const CMat& q, double iso_tol = 1e-10) {
  const Index n = q.rows();
  const Index j = q.cols();
  require(j <= n, Errc::NotIsometry, "unitary_completion: more columns than rows");
  if (j == 0) return CMat::Identity(n, n);
  const double dev = (q.adjoint() * q - CMat::Identity(j, j)).norm();
  require(dev <= iso_tol * double(j) + 1e-14, Errc::NotIsometry,
          "unitary_completion: columns not orthonormal");
  if (j == n) return q;

  Eigen::HouseholderQR<CMat> qr(q);
  CMat full = qr.householderQ() * CMat::Identity(n, n);
  CMat u(n, n);
  u.leftCols(j) = q;
  u.rightCols(n - j) = full.rightCols(n - j);
  return u;
}

struct SvdResult {
  CMat u;
  RVec sigma;  // descending
  CMat v;
};

/// Full SVD, singular values descending.
inline SvdResult svd(const CMat& c) {
  Eigen::JacobiSVD<CMat> dec(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

struct HermitianRoots {
  CMat sqrt;
  CMat inv_sqrt;
};

/// Principal square root and its inverse for a Hermitian positive definite
/// matrix, via eigendecomposition.
inline HermitianRoots hermitian_sqrt_inv(const CMat& s, double pd_tol = 1e-10) {
  const Index n = s.rows();
  require(s.cols() == n, Errc::DimensionMismatch, "hermitian_sqrt_inv: matrix not square");
  if (n == 0) return {CMat(0, 0), CMat(0, 0)};
  require(is_hermitian(s), Errc::NotPositiveDefinite,
          "hermitian_sqrt_inv: input not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(s));
  const RVec& lam = es.eigenvalues();  // ascending
  require(lam(n - 1) > 0.0 && lam(0) > pd_tol * lam(n - 1), Errc::NotPositiveDefinite,
          "hermitian_sqrt_inv: input not positive definite");

  const RVec root = lam.array().sqrt();
  const CMat& v = es.eigenvectors();
  CMat half = v * root.asDiagonal() * v.adjoint();
  CMat inv = v * root.cwiseInverse().asDiagonal() * v.adjoint();
  return {hermitized(half), hermitized(inv)};
}

struct SchurResult {
  CMat complement;  // A - B D^{-1} B^H for S = [[A, B], [B^H, D]]
  CMat coupling;    // B D^{-1}
};

/// Schur complement of the trailing diagonal block. `split` is the size of
/// the leading block that survives.
inline SchurResult schur_complement(const CMat& s2, Index split) {
  const Index n = s2.rows();
  require(s2.cols() == n, Errc::DimensionMismatch, "schur_complement: matrix not square");
  require(split >= 0 && split <= n, Errc::DimensionMismatch, "schur_complement: bad split");
  const Index tail = n - split;
  CMat a = s2.topLeftCorner(split, split);
  if (tail == 0) return {hermitized(a), CMat::Zero(split, 0)};

  CMat b = s2.topRightCorner(split, tail);
  CMat d = hermitized(s2.bottomRightCorner(tail, tail));
  Eigen::LLT<CMat> llt(d);
  require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite,
          "schur_complement: trailing block not positive definite");
  CMat coupling = llt.solve(b.adjoint()).adjoint();
  CMat comp = hermitized(a - coupling * b.adjoint());
  return {std::move(comp), std::move(coupling)};
}

struct SpectralPair {
  RVec values;   // descending
  CMat vectors;  // matching columns, unitary
};

/// Hermitian eigendecomposition ordered descending.
inline SpectralPair hermitian_eig(const CMat& s) {
  const Index n = s.rows();
  require(s.cols() == n, Errc::DimensionMismatch, "hermitian_eig: matrix not square");
  if (n == 0) return {RVec(0), CMat(0, 0)};
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(s));
  RVec values(n);
  CMat vectors(n, n);
  for (Index i = 0; i < n; ++i) {
    values(i) = es.eigenvalues()(n - 1 - i);
    vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return {std::move(values), std::move(vectors)};
}

/// Count of eigenvalues above tol_scale times the Frobenius norm; the rank
/// convention used by every statistic-rank claim.
inline Index numerical_rank(const CMat& s, double tol_scale = 1e-8) {
  if (s.rows() == 0) return 0;
  const double thresh = tol_scale * s.norm();
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(s), Eigen::EigenvaluesOnly);
  Index rank = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > thresh) ++rank;
  return rank;
}

}  // namespace radinv::linalg
