#pragma once
// The transformation group that leaves the detection problem unchanged: block
// upper-triangular left factors paired with top-block shifts, its action on
// the sufficient statistic, and the constructive converse that rebuilds a
// group element linking any two statistics with equal invariants.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>

#include "linalg.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace radinv::invariance {

/// Pair (G, F): G is block upper-triangular over the row split (t, r, nj)
/// with invertible diagonal blocks, F is nonzero only in its top t rows.
struct GroupElement {
  CMat g;  // n x n
  CMat f;  // n x m
  BlockPartition partition;
};

struct SufficientStatistic {
  CMat z_c;  // n x m, signal-bearing columns
  CMat s_c;  // n x n, scatter of the signal-free columns
  BlockPartition partition;
};

namespace detail {

inline void stamp_structure(GroupElement& e) {
  const Index t = e.partition.t, r = e.partition.r, nj = e.partition.nj;
  e.g.block(t, 0, r + nj, t).setZero();
  e.g.block(t + r, t, nj, r).setZero();
  e.f.bottomRows(r + nj).setZero();
}

inline double min_singular(const CMat& block) {
  if (block.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<CMat> svd(block);
  return svd.singularValues()(block.rows() - 1);
}

}  // namespace detail

inline void validate_element(const GroupElement& e, double tol = 1e-10) {
  e.partition.validate();
  const Index n = e.partition.n();
  const Index t = e.partition.t, r = e.partition.r, nj = e.partition.nj;
  require(e.g.rows() == n && e.g.cols() == n, Errc::DimensionMismatch,
          "group element: G must be n x n");
  require(e.f.rows() == n && e.f.cols() == e.partition.m, Errc::DimensionMismatch,
          "group element: F must be n x m");
  require(e.g.block(t, 0, r + nj, t).norm() == 0.0 &&
              e.g.block(t + r, t, nj, r).norm() == 0.0,
          Errc::DimensionMismatch, "group element: sub-diagonal blocks must be zero");
  require(e.f.bottomRows(r + nj).norm() == 0.0, Errc::DimensionMismatch,
          "group element: F must vanish below the top block");
  require(detail::min_singular(e.g.topLeftCorner(t, t)) > tol &&
              detail::min_singular(e.g.block(t, t, r, r)) > tol &&
              detail::min_singular(e.g.block(t + r, t + r, nj, nj)) > tol,
          Errc::IllConditioned, "group element: singular diagonal block");
}

inline void validate_statistic(const SufficientStatistic& s) {
  s.partition.validate();
  const Index n = s.partition.n();
  require(s.z_c.rows() == n && s.z_c.cols() == s.partition.m, Errc::DimensionMismatch,
          "sufficient statistic: z_c must be n x m");
  require(s.s_c.rows() == n && s.s_c.cols() == n, Errc::DimensionMismatch,
          "sufficient statistic: s_c must be n x n");
  require(is_hermitian(s.s_c), Errc::NotPositiveDefinite,
          "sufficient statistic: s_c not Hermitian");
}

inline GroupElement identity(const BlockPartition& partition) {
  partition.validate();
  const Index n = partition.n();
  return {CMat::Identity(n, n), CMat::Zero(n, partition.m), partition};
}

/// Composition "a then b": (G_b G_a, G_b F_a + F_b).
inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  require(a.partition == b.partition, Errc::DimensionMismatch,
          "compose: partition mismatch");
  GroupElement out{b.g * a.g, b.g * a.f + b.f, a.partition};
  detail::stamp_structure(out);
  return out;
}

/// Inverse element (G^{-1}, -G^{-1} F), computed blockwise so the triangular
/// structure stays exact.
inline GroupElement inverse(const GroupElement& e, double tol = 1e-10) {
  validate_element(e, tol);
  const Index t = e.partition.t, r = e.partition.r, nj = e.partition.nj;
  const Index n = e.partition.n();

  const CMat g11 = e.g.topLeftCorner(t, t);
  const CMat g12 = e.g.block(0, t, t, r);
  const CMat g13 = e.g.block(0, t + r, t, nj);
  const CMat g22 = e.g.block(t, t, r, r);
  const CMat g23 = e.g.block(t, t + r, r, nj);
  const CMat g33 = e.g.block(t + r, t + r, nj, nj);

  const CMat h11 = g11.fullPivLu().inverse();
  const CMat h22 = g22.fullPivLu().inverse();
  const CMat h33 = g33.fullPivLu().inverse();
  const CMat h12 = -h11 * g12 * h22;
  const CMat h23 = -h22 * g23 * h33;
  const CMat h13 = h11 * (g12 * h22 * g23 - g13) * h33;

  GroupElement out;
  out.partition = e.partition;
  out.g = CMat::Zero(n, n);
  out.g.topLeftCorner(t, t) = h11;
  out.g.block(0, t, t, r) = h12;
  out.g.block(0, t + r, t, nj) = h13;
  out.g.block(t, t, r, r) = h22;
  out.g.block(t, t + r, r, nj) = h23;
  out.g.block(t + r, t + r, nj, nj) = h33;
  out.f = CMat::Zero(n, e.partition.m);
  out.f.topRows(t) = -(h11 * e.f.topRows(t));
  return out;
}

/// Action on the sufficient statistic: (G Z_c + F, G S_c G^H).
inline SufficientStatistic apply_action(const GroupElement& g,
                                        const SufficientStatistic& s) {
  require(g.partition == s.partition, Errc::DimensionMismatch,
          "apply_action: partition mismatch");
  return {g.g * s.z_c + g.f, hermitized(g.g * s.s_c * g.g.adjoint()), s.partition};
}

/// Random element: diagonal blocks are Gaussian plus a 2I conditioning shift,
/// redrawn until the smallest singular value reaches 0.5; off-diagonal blocks
/// and the shift are plain Gaussian. Deterministic per seed.
inline GroupElement random_group_element(const BlockPartition& partition,
                                         std::uint64_t seed) {
  partition.validate();
  const Index t = partition.t, r = partition.r, nj = partition.nj;
  const Index n = partition.n();
  Rng rng(seed);

  auto diag_block = [&rng](Index d) {
    if (d == 0) return CMat(0, 0);
    for (;;) {
      CMat b = rng.cgaussian_matrix(d, d) + 2.0 * CMat::Identity(d, d);
      if (detail::min_singular(b) >= 0.5) return b;
    }
  };

  GroupElement out;
  out.partition = partition;
  out.g = CMat::Zero(n, n);
  out.g.topLeftCorner(t, t) = diag_block(t);
  out.g.block(t, t, r, r) = diag_block(r);
  out.g.block(t + r, t + r, nj, nj) = diag_block(nj);
  out.g.block(0, t, t, r) = rng.cgaussian_matrix(t, r);
  out.g.block(0, t + r, t, nj) = rng.cgaussian_matrix(t, nj);
  out.g.block(t, t + r, r, nj) = rng.cgaussian_matrix(r, nj);
  out.f = CMat::Zero(n, partition.m);
  out.f.topRows(t) = rng.cgaussian_matrix(t, partition.m);
  return out;
}

namespace detail {

// Whitened row coordinates of one statistic: Y23 = (S23^{-1/2} Z23)^H and
// Y3 = (S33^{-1/2} Z3)^H, together with the lower-triangular block factor L2
// satisfying L2^H L2 = S2.
struct TrailingFactors {
  CMat y23;  // m x r
  CMat y3;   // m x nj
  CMat l2;   // (r + nj) x (r + nj)
};

inline TrailingFactors trailing_factors(const SufficientStatistic& s) {
  const Index t = s.partition.t, r = s.partition.r, nj = s.partition.nj;
  const CMat s2 = s.s_c.bottomRightCorner(r + nj, r + nj);
  const auto sch = linalg::schur_complement(s2, r);
  const CMat s33 = hermitized(s2.bottomRightCorner(nj, nj));
  const auto roots23 = linalg::hermitian_sqrt_inv(sch.complement);
  const auto roots33 = linalg::hermitian_sqrt_inv(s33);

  const CMat z2 = s.z_c.middleRows(t, r);
  const CMat z3 = s.z_c.bottomRows(nj);
  const CMat z23 = z2 - sch.coupling * z3;

  TrailingFactors out;
  out.y23 = (roots23.inv_sqrt * z23).adjoint();
  out.y3 = (roots33.inv_sqrt * z3).adjoint();
  out.l2 = CMat::Zero(r + nj, r + nj);
  out.l2.topLeftCorner(r, r) = roots23.sqrt;
  out.l2.bottomLeftCorner(nj, r) = roots33.inv_sqrt * s2.bottomLeftCorner(nj, r);
  out.l2.bottomRightCorner(nj, nj) = roots33.sqrt;
  return out;
}

// Unitary u with source * u = target, valid when both inputs share their Gram
// matrix. Both sides are decomposed, singular vectors are phase-normalized by
// making the first sizable entry of each left vector real positive, and the
// right factors are matched.
inline CMat align_unitary(const CMat& source, const CMat& target) {
  const Index c = source.cols();
  require(target.rows() == source.rows() && target.cols() == c, Errc::DimensionMismatch,
          "align_unitary: shape mismatch");
  if (c == 0) return CMat(0, 0);

  auto normalized = [](const CMat& a) {
    Eigen::JacobiSVD<CMat> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    CMat u = dec.matrixU();
    CMat v = dec.matrixV();
    const RVec& sig = dec.singularValues();
    const Index rank_limit = std::min(a.rows(), a.cols());
    const double top = sig.size() > 0 ? sig(0) : 0.0;
    for (Index i = 0; i < rank_limit; ++i) {
      if (sig(i) <= 1e-12 * std::max(top, 1e-300)) break;
      Index pick = 0;
      while (pick + 1 < u.rows() && std::abs(u(pick, i)) <= 1e-6) ++pick;
      const cplx entry = u(pick, i);
      if (std::abs(entry) > 0.0) {
        const cplx phase = std::conj(entry / std::abs(entry));
        u.col(i) *= phase;
        v.col(i) *= phase;
      }
    }
    return std::make_pair(std::move(v), sig);
  };

  auto [v_src, sig_src] = normalized(source);
  auto [v_tgt, sig_tgt] = normalized(target);

  const double top = std::max(sig_src(0), sig_tgt(0));
  const Index rank_limit = std::min(source.rows(), c);
  for (Index i = 0; i + 1 < rank_limit; ++i) {
    const bool live = sig_src(i) > 1e-12 * std::max(top, 1e-300) &&
                      sig_src(i + 1) > 1e-12 * std::max(top, 1e-300);
    require(!live || sig_src(i) - sig_src(i + 1) > 1e-8 * std::max(top, 1e-300),
            Errc::IllConditioned, "align_unitary: degenerate singular values");
  }
  return v_src * v_tgt.adjoint();
}

}  // namespace detail

/// Rebuild a group element g with apply_action(g, source) = target, assuming
/// the two statistics share their invariants within mis_tol. The trailing
/// rows are linked through the block factors L2 and a unitary alignment of
/// the whitened coordinates; the top rows are completed through the leading
/// Schur complements; the shift absorbs the z_c top-row mismatch.
inline GroupElement reconstruct_transformation(const SufficientStatistic& target,
                                               const SufficientStatistic& source,
                                               double mis_tol = 1e-8,
                                               double* mis_residual = nullptr) {
  require(target.partition == source.partition, Errc::DimensionMismatch,
          "reconstruct_transformation: partition mismatch");
  validate_statistic(target);
  validate_statistic(source);
  const Index t = target.partition.t, r = target.partition.r, nj = target.partition.nj;
  const Index n = target.partition.n();

  const auto ft = detail::trailing_factors(target);
  const auto fs = detail::trailing_factors(source);

  const CMat ta_t = ft.y23 * ft.y23.adjoint();
  const CMat ta_s = fs.y23 * fs.y23.adjoint();
  const CMat tb_t = ft.y3 * ft.y3.adjoint();
  const CMat tb_s = fs.y3 * fs.y3.adjoint();
  const double residual = std::max(rel_error(ta_s, ta_t), rel_error(tb_s, tb_t));
  if (mis_residual != nullptr) *mis_residual = residual;
  require(residual <= mis_tol, Errc::NotEquivalent,
          "reconstruct_transformation: invariant mismatch exceeds tolerance");

  const CMat u23 = detail::align_unitary(fs.y23, ft.y23);
  const CMat u3 = detail::align_unitary(fs.y3, ft.y3);
  CMat u1 = CMat::Zero(r + nj, r + nj);
  u1.topLeftCorner(r, r) = u23.adjoint();
  u1.bottomRightCorner(nj, nj) = u3.adjoint();

  const CMat g3 = ft.l2.adjoint() * u1 * fs.l2.adjoint().fullPivLu().inverse();

  GroupElement out;
  out.partition = target.partition;
  out.g = CMat::Zero(n, n);
  out.g.bottomRightCorner(r + nj, r + nj) = g3;
  out.f = CMat::Zero(n, target.partition.m);

  if (t > 0) {
    const auto lead_t = linalg::schur_complement(target.s_c, t);
    const auto lead_s = linalg::schur_complement(source.s_c, t);
    const CMat g1 = linalg::hermitian_sqrt_inv(lead_t.complement).sqrt *
                    linalg::hermitian_sqrt_inv(lead_s.complement).inv_sqrt;

    const CMat s3_t = target.s_c.topRightCorner(t, r + nj);
    const CMat s3_s = source.s_c.topRightCorner(t, r + nj);
    const CMat s2_s = hermitized(source.s_c.bottomRightCorner(r + nj, r + nj));
    Eigen::LLT<CMat> llt(s2_s);
    require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite,
            "reconstruct_transformation: trailing block not positive definite");
    const CMat rhs = s3_t * g3.adjoint().fullPivLu().inverse() - g1 * s3_s;
    const CMat g2 = llt.solve(rhs.adjoint()).adjoint();

    out.g.topLeftCorner(t, t) = g1;
    out.g.topRightCorner(t, r + nj) = g2;
    out.f.topRows(t) = target.z_c.topRows(t) - g1 * source.z_c.topRows(t) -
                       g2 * source.z_c.bottomRows(r + nj);
  }
  detail::stamp_structure(out);
  return out;
}

}  // namespace radinv::invariance
