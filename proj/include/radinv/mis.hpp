#pragma once
// Maximal invariant of the canonical detection problem: reduction of a
// dataset to its sufficient pair, the two-branch invariant statistic, the
// induced parameter-space invariant, the covariance whitening element, and a
// direct sampler of the invariant's distribution.

#include <cstdint>
#include <optional>
#include <utility>

#include "invariance.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace radinv::mis {

using invariance::GroupElement;
using invariance::SufficientStatistic;

/// Value of the invariant statistic. With interference-free rows present
/// (nj > 0) the invariant is the pair (t_a, t_b); otherwise it collapses to
/// the single matrix t.
struct MisValue {
  enum class Kind { Pair, Single };
  Kind kind = Kind::Pair;
  CMat t_a;  // m x m, signal branch (Pair)
  CMat t_b;  // m x m, ancillary branch (Pair)
  CMat t;    // m x m (Single)
};

struct InducedInvariant {
  CMat t_p;  // m x m
};

/// One draw of the invariant in its representation coordinates.
struct MisSample {
  CMat t_1a;  // m x m
  CMat t_1b;  // m x m
};

namespace detail {

inline Eigen::LLT<CMat> pd_factor(const CMat& s, const char* what) {
  Eigen::LLT<CMat> llt(hermitized(s));
  require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite, what);
  return llt;
}

inline void require_pd(const CMat& r, const char* what) {
  require(is_hermitian(r), Errc::NotPositiveDefinite, what);
  if (r.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(r),
                                         Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  require(top > 0.0 && es.eigenvalues().minCoeff() > 1e-12 * top,
          Errc::NotPositiveDefinite, what);
}

inline CMat wishart_draw(Rng& rng, Index dim, Index dof) {
  const CMat a = rng.cgaussian_matrix(dim, dof);
  return hermitized(a * a.adjoint());
}

}  // namespace detail

/// Keep the first m columns of z as the signal-bearing part and compress the
/// remaining k - m columns into their scatter matrix.
inline SufficientStatistic sufficient_statistic(const model::Dataset& d) {
  require(d.partition.km >= d.partition.n(), Errc::InsufficientSecondaryData,
          "sufficient_statistic: need at least n signal-free columns");
  d.partition.validate();
  const Index n = d.partition.n();
  const Index m = d.partition.m;
  require(d.z.rows() == n && d.z.cols() == d.partition.k(), Errc::DimensionMismatch,
          "sufficient_statistic: data shape does not match the partition");
  SufficientStatistic out;
  out.partition = d.partition;
  out.z_c = d.z.leftCols(m);
  const CMat z_perp = d.z.rightCols(d.partition.km);
  out.s_c = hermitized(z_perp * z_perp.adjoint());
  return out;
}

/// Invariant statistic. nj > 0: t_a from the interference-free rows after
/// regressing out the trailing block, t_b from the trailing rows alone.
/// nj = 0: the single matrix built from the signal rows.
inline MisValue compute_mis(const SufficientStatistic& s) {
  invariance::validate_statistic(s);
  const Index t = s.partition.t, r = s.partition.r, nj = s.partition.nj;

  MisValue out;
  const CMat z2 = s.z_c.middleRows(t, r);
  if (nj == 0) {
    const CMat s22 = s.s_c.block(t, t, r, r);
    const auto llt = detail::pd_factor(s22, "compute_mis: singular s22");
    out.kind = MisValue::Kind::Single;
    out.t = hermitized(z2.adjoint() * llt.solve(z2));
    out.t_a = CMat(0, 0);
    out.t_b = CMat(0, 0);
    return out;
  }

  const CMat z3 = s.z_c.bottomRows(nj);
  const CMat s2 = s.s_c.bottomRightCorner(r + nj, r + nj);
  const auto s33_llt =
      detail::pd_factor(s2.bottomRightCorner(nj, nj), "compute_mis: singular s33");
  const auto sch = linalg::schur_complement(s2, r);
  const CMat z23 = z2 - sch.coupling * z3;
  const auto s23_llt =
      detail::pd_factor(sch.complement, "compute_mis: singular conditional block");

  out.kind = MisValue::Kind::Pair;
  out.t_a = hermitized(z23.adjoint() * s23_llt.solve(z23));
  out.t_b = hermitized(z3.adjoint() * s33_llt.solve(z3));
  out.t = CMat(0, 0);
  return out;
}

/// Parameter-space counterpart of the invariant: t_p = b^H r23^{-1} b with
/// r23 the conditional covariance of the signal rows given the trailing rows.
inline InducedInvariant induced_invariant(const CMat& b, const CMat& r_full,
                                          const BlockPartition& partition) {
  partition.validate();
  const Index n = partition.n();
  require(r_full.rows() == n && r_full.cols() == n, Errc::DimensionMismatch,
          "induced_invariant: covariance must be n x n");
  require(b.rows() == partition.r && b.cols() == partition.m, Errc::DimensionMismatch,
          "induced_invariant: signal matrix must be r x m");
  detail::require_pd(r_full, "induced_invariant: covariance not positive definite");

  const Index tail = partition.r + partition.nj;
  const CMat r2 = r_full.bottomRightCorner(tail, tail);
  const auto sch = linalg::schur_complement(r2, partition.r);
  const auto llt =
      detail::pd_factor(sch.complement, "induced_invariant: singular conditional block");
  return {hermitized(b.adjoint() * llt.solve(b))};
}

/// Group element that whitens the trailing rows of the covariance: identity
/// on the top block, conditional-covariance inverse root on the signal rows,
/// trailing-block inverse root below, with the cross term cancelling the
/// correlation. Applying its trailing part to the covariance gives the
/// identity.
inline GroupElement whitening_transform(const CMat& r_full,
                                        const BlockPartition& partition) {
  partition.validate();
  const Index n = partition.n();
  require(r_full.rows() == n && r_full.cols() == n, Errc::DimensionMismatch,
          "whitening_transform: covariance must be n x n");
  detail::require_pd(r_full, "whitening_transform: covariance not positive definite");

  const Index t = partition.t, r = partition.r, nj = partition.nj;
  const CMat r2 = r_full.bottomRightCorner(r + nj, r + nj);
  const auto sch = linalg::schur_complement(r2, r);
  const auto roots23 = linalg::hermitian_sqrt_inv(sch.complement);
  const auto roots33 =
      linalg::hermitian_sqrt_inv(hermitized(r2.bottomRightCorner(nj, nj)));

  GroupElement out = invariance::identity(partition);
  out.g.block(t, t, r, r) = roots23.inv_sqrt;
  out.g.block(t, t + r, r, nj) = -roots23.inv_sqrt * sch.coupling;
  out.g.block(t + r, t + r, nj, nj) = roots33.inv_sqrt;
  return out;
}

/// Sum of dof outer products of standard proper complex Gaussian vectors.
inline CMat sample_complex_wishart(Index dim, Index dof, std::uint64_t seed) {
  require(dim >= 0, Errc::DimensionMismatch, "sample_complex_wishart: negative dim");
  require(dof >= dim, Errc::InsufficientSecondaryData,
          "sample_complex_wishart: dof below dimension");
  Rng rng(seed);
  return detail::wishart_draw(rng, dim, dof);
}

/// Draw the invariant directly in its representation coordinates, without
/// generating raw data. b_whitened (already multiplied by the inverse root of
/// the conditional covariance) selects the signal-present distribution; pass
/// nullopt for the signal-free one. Requires nj > 0.
inline MisSample sample_mis(const BlockPartition& partition,
                            const std::optional<CMat>& b_whitened,
                            std::uint64_t seed) {
  partition.validate();
  const Index r = partition.r, nj = partition.nj, m = partition.m;
  require(nj > 0, Errc::UnsupportedBranch,
          "sample_mis: representation needs interference-free rows");
  require(partition.km >= nj && partition.km - nj >= r,
          Errc::InsufficientSecondaryData, "sample_mis: not enough degrees of freedom");
  if (b_whitened.has_value()) {
    require(b_whitened->rows() == r && b_whitened->cols() == m,
            Errc::DimensionMismatch, "sample_mis: signal matrix must be r x m");
  }

  Rng rng(seed);
  const CMat s33 = detail::wishart_draw(rng, nj, partition.km);
  const CMat z3 = rng.cgaussian_matrix(nj, m);
  const auto s33_llt = detail::pd_factor(s33, "sample_mis: singular trailing draw");
  const CMat t_1b = hermitized(z3.adjoint() * s33_llt.solve(z3));
  const CMat k_s3 =
      linalg::hermitian_sqrt_inv(CMat::Identity(m, m) + t_1b).inv_sqrt.transpose();

  const CMat s23 = detail::wishart_draw(rng, r, partition.km - nj);
  CMat x = rng.cgaussian_matrix(r, m);
  if (b_whitened.has_value()) x += *b_whitened * k_s3;
  const auto s23_llt = detail::pd_factor(s23, "sample_mis: singular conditional draw");

  MisSample out;
  out.t_1a = hermitized(x.adjoint() * s23_llt.solve(x));
  out.t_1b = t_1b;
  return out;
}

/// Map a computed pair invariant into the sampler's coordinates: t_1b equals
/// t_b, and t_a is congruence-transformed by the trailing-branch factor.
inline MisSample to_sample_coordinates(const MisValue& v) {
  require(v.kind == MisValue::Kind::Pair, Errc::UnsupportedBranch,
          "to_sample_coordinates: pair invariant required");
  const Index m = v.t_b.rows();
  const CMat k_s3 =
      linalg::hermitian_sqrt_inv(CMat::Identity(m, m) + v.t_b).inv_sqrt.transpose();
  return {hermitized(k_s3.adjoint() * v.t_a * k_s3), v.t_b};
}

}  // namespace radinv::mis
