#pragma once
// Closed-form reductions of the invariant statistic for the classic detection
// geometries: point-like target, vector subspace signal, subspace
// interference, fully multidimensional signals, range-spread target, and the
// GMANOVA layout. Each collapses the general two-branch statistic to the
// familiar scalar, matrix, or eigenvalue form for its partition.

#include <utility>

#include "linalg.hpp"
#include "mis.hpp"
#include "types.hpp"

namespace radinv::special {

using invariance::SufficientStatistic;
using mis::MisValue;

struct ScalarPair {
  double t_a = 0.0;
  double t_b = 0.0;
};

struct MatrixPair {
  CMat t_a;
  CMat t_b;
};

struct EigLink {
  RVec eig_t;   // spectrum seen from the m-dimensional side
  RVec eig_tc;  // spectrum seen from the n-dimensional side
};

struct CompositeEigs {
  RVec eig_tb;
  RVec eig_sum;
};

namespace detail {

inline void require_partition(const SufficientStatistic& s, bool ok,
                              const char* what) {
  s.partition.validate();
  require(ok, Errc::UnsupportedBranch, what);
}

inline RVec descending_eigs(const CMat& h) {
  if (h.rows() == 0) return RVec(0);
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

}  // namespace detail

/// Single cell under test, one steering direction, no structured
/// interference: both branches of the invariant are scalars.
inline ScalarPair mis_pointlike(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t == 0 && s.partition.r == 1 && s.partition.m == 1 &&
             s.partition.nj > 0,
      "mis_pointlike: needs t=0, r=1, m=1, nj>0");
  const Index nj = s.partition.nj;
  const cplx z2 = s.z_c(0, 0);
  const CMat z3 = s.z_c.bottomRows(nj);
  const CMat s33 = hermitized(s.s_c.bottomRightCorner(nj, nj));
  Eigen::LLT<CMat> llt(s33);
  require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite,
          "mis_pointlike: singular trailing block");
  const CMat s23 = s.s_c.block(0, 1, 1, nj);
  const CMat solved_z3 = llt.solve(z3);
  const CMat solved_s32 = llt.solve(s23.adjoint());
  const cplx z23 = z2 - (s23 * solved_z3)(0, 0);
  const double s2dot3 = std::real(s.s_c(0, 0) - (s23 * solved_s32)(0, 0));
  require(s2dot3 > 0.0, Errc::NotPositiveDefinite,
          "mis_pointlike: conditional variance not positive");
  return {std::norm(z23) / s2dot3, std::real((z3.adjoint() * solved_z3)(0, 0))};
}

/// Signal confined to a known r-dimensional subspace, scalar coordinate.
inline ScalarPair mis_vector_subspace(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t == 0 && s.partition.m == 1 && s.partition.nj > 0,
      "mis_vector_subspace: needs t=0, m=1, nj>0");
  const MisValue v = mis::compute_mis(s);
  return {std::real(v.t_a(0, 0)), std::real(v.t_b(0, 0))};
}

/// Scalar signal observed on top of structured interference rows; the
/// interference coordinates drop out of the statistic entirely.
inline ScalarPair mis_subspace_interference(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t >= 1 && s.partition.m == 1 && s.partition.nj > 0,
      "mis_subspace_interference: needs t>=1, m=1, nj>0");
  const Index tail = s.partition.r + s.partition.nj;
  SufficientStatistic reduced;
  reduced.partition = s.partition;
  reduced.partition.t = 0;
  reduced.z_c = s.z_c.bottomRows(tail);
  reduced.s_c = hermitized(s.s_c.bottomRightCorner(tail, tail));
  const MisValue v = mis::compute_mis(reduced);
  return {std::real(v.t_a(0, 0)), std::real(v.t_b(0, 0))};
}

/// Signal may occupy the whole observation space (r = n): the invariant is
/// one matrix.
inline MisValue mis_multidim(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t == 0 && s.partition.nj == 0,
      "mis_multidim: needs t=0 and r=n");
  return mis::compute_mis(s);
}

/// Equal nonzero spectra of the two Gram orderings of the whitened signal
/// block: z_m^H z_m and z_m z_m^H share their positive eigenvalues.
inline EigLink eig_link_multidim(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t == 0 && s.partition.nj == 0,
      "eig_link_multidim: needs t=0 and r=n");
  const Index keep = std::min(s.partition.m, s.partition.n());
  const CMat s22 = hermitized(s.s_c);
  const CMat z_m = linalg::hermitian_sqrt_inv(s22).inv_sqrt * s.z_c;
  const RVec from_m = detail::descending_eigs(z_m.adjoint() * z_m);
  const RVec from_n = detail::descending_eigs(z_m * z_m.adjoint());
  return {from_m.head(keep), from_n.head(keep)};
}

/// One steering direction across m range cells: the signal branch is the
/// rank-one outer product of the conditionally whitened row.
inline MatrixPair mis_range_spread(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t == 0 && s.partition.r == 1 && s.partition.nj > 0,
      "mis_range_spread: needs t=0, r=1, nj>0");
  const Index nj = s.partition.nj;
  const CMat z2 = s.z_c.topRows(1);
  const CMat z3 = s.z_c.bottomRows(nj);
  const CMat s33 = hermitized(s.s_c.bottomRightCorner(nj, nj));
  Eigen::LLT<CMat> llt(s33);
  require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite,
          "mis_range_spread: singular trailing block");
  const CMat s23 = s.s_c.block(0, 1, 1, nj);
  const CMat z23 = z2 - s23 * llt.solve(z3);
  const double s2dot3 =
      std::real(s.s_c(0, 0) - (s23 * llt.solve(s23.adjoint()))(0, 0));
  require(s2dot3 > 0.0, Errc::NotPositiveDefinite,
          "mis_range_spread: conditional variance not positive");
  MatrixPair out;
  out.t_a = hermitized(z23.adjoint() * z23 / s2dot3);
  out.t_b = hermitized(z3.adjoint() * llt.solve(z3));
  return out;
}

/// Eigenvalue summary that survives an extra right-unitary symmetry: the
/// spectrum of the ancillary branch and of the rank-one-updated sum.
inline CompositeEigs composite_eig_statistic(const CMat& t_a, const CMat& t_b) {
  const Index m = t_a.rows();
  require(t_a.cols() == m && t_b.rows() == m && t_b.cols() == m,
          Errc::DimensionMismatch, "composite_eig_statistic: square m x m inputs");
  require(is_hermitian(t_a) && is_hermitian(t_b), Errc::NotPositiveDefinite,
          "composite_eig_statistic: Hermitian inputs required");
  const RVec eig_a = detail::descending_eigs(t_a);
  if (m > 1) {
    require(eig_a(1) <= 1e-8 * std::max(eig_a.sum(), 0.0), Errc::NotRankOne,
            "composite_eig_statistic: signal branch must be rank one");
  }
  return {detail::descending_eigs(t_b), detail::descending_eigs(t_a + t_b)};
}

/// Full GMANOVA layout (no interference rows): the general pair applies
/// unchanged.
inline MisValue mis_gmanova(const SufficientStatistic& s) {
  detail::require_partition(
      s, s.partition.t == 0 && s.partition.nj > 0,
      "mis_gmanova: needs t=0, nj>0");
  return mis::compute_mis(s);
}

}  // namespace radinv::special
