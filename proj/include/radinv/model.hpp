#pragma once
// Double-subspace observation model: problem geometry, reduction to canonical
// coordinates through left and right rotations, and seeded synthesis of
// datasets under either hypothesis.

#include <string>
#include <utility>

#include "linalg.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace radinv::model {

enum class Hypothesis { H0, H1, Unknown };

inline const char* hypothesis_name(Hypothesis h) {
  switch (h) {
    case Hypothesis::H0: return "H0";
    case Hypothesis::H1: return "H1";
    case Hypothesis::Unknown: return "unknown";
  }
  return "unknown";
}

/// Problem geometry: channel count n, snapshot count k, right-factor rank m,
/// interference rank t, signal rank r, and the three known subspace matrices.
struct ProblemSpec {
  Index n = 0;
  Index k = 0;
  Index m = 0;
  Index t = 0;
  Index r = 0;
  CMat a_t;  // n x t, interference directions
  CMat a_r;  // n x r, signal directions
  CMat c;    // m x k, right factor shared by both mean terms

  BlockPartition partition() const { return {t, r, n - t - r, m, k - m}; }

  void validate(double tol = 1e-8) const {
    require(t >= 0 && r >= 1 && m >= 1, Errc::DimensionMismatch,
            "problem spec: need t >= 0, r >= 1, m >= 1");
    require(t + r <= n, Errc::DimensionMismatch, "problem spec: t + r exceeds n");
    require(k - m >= n, Errc::DimensionMismatch, "problem spec: need k - m >= n");
    require(a_t.rows() == n && a_t.cols() == t, Errc::DimensionMismatch,
            "problem spec: a_t must be n x t");
    require(a_r.rows() == n && a_r.cols() == r, Errc::DimensionMismatch,
            "problem spec: a_r must be n x r");
    require(c.rows() == m && c.cols() == k, Errc::DimensionMismatch,
            "problem spec: c must be m x k");

    CMat joint(n, t + r);
    joint << a_t, a_r;
    Eigen::JacobiSVD<CMat> sj(joint);
    require(sj.singularValues()(t + r - 1) > tol * sj.singularValues()(0),
            Errc::RankDeficient, "problem spec: left subspace columns nearly dependent");
    Eigen::JacobiSVD<CMat> sc(c);
    require(sc.singularValues()(m - 1) > tol * sc.singularValues()(0),
            Errc::RankDeficient, "problem spec: right factor not full row rank");
  }
};

/// Unknowns of the data law: disturbance covariance and the two coordinate
/// matrices. b_r is all-zero under the null.
struct TrueParams {
  CMat r_star;  // n x n Hermitian PD
  CMat b_t;     // t x m
  CMat b_r;     // r x m

  void validate(const ProblemSpec& spec) const {
    require(r_star.rows() == spec.n && r_star.cols() == spec.n, Errc::DimensionMismatch,
            "params: covariance must be n x n");
    require(is_hermitian(r_star), Errc::NotPositiveDefinite,
            "params: covariance not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(r_star), Eigen::EigenvaluesOnly);
    require(es.eigenvalues()(0) > 0.0, Errc::NotPositiveDefinite,
            "params: covariance not positive definite");
    require(b_t.rows() == spec.t && b_t.cols() == spec.m, Errc::DimensionMismatch,
            "params: b_t must be t x m");
    require(b_r.rows() == spec.r && b_r.cols() == spec.m, Errc::DimensionMismatch,
            "params: b_r must be r x m");
  }
};

/// Rotation factors of the canonical reduction plus the rotated covariance.
struct CanonicalModel {
  CMat u_alpha;    // n x n unitary
  CMat v_gamma;    // k x k unitary
  CMat m_gamma;    // m x m nonsingular
  CMat r_alpha_t;  // t x t upper triangular
  CMat r_alpha_x;  // t x r
  CMat r_alpha_r;  // r x r upper triangular
  BlockPartition partition;
  CMat r;          // n x n rotated covariance
};

struct Dataset {
  CMat z;  // n x k canonical data
  BlockPartition partition;
  Hypothesis label = Hypothesis::Unknown;
};

/// Reduce the geometry to canonical coordinates. The left factor comes from
/// the positive-diagonal QR of [a_t a_r]; the right factor from the
/// positive-diagonal QR of the adjoint of c, so already-canonical selector
/// inputs map to identity factors. An optional covariance is rotated into the
/// canonical frame (identity when omitted).
inline CanonicalModel canonicalize(const ProblemSpec& spec, const CMat& r_star = CMat()) {
  spec.validate();
  const Index n = spec.n, t = spec.t, r = spec.r;

  CMat joint(n, t + r);
  joint << spec.a_t, spec.a_r;
  auto qr_left = linalg::qr_decompose(joint);
  CMat u_alpha = linalg::unitary_completion(qr_left.q);

  auto qr_right = linalg::qr_decompose(spec.c.adjoint());
  CMat v_gamma = linalg::unitary_completion(qr_right.q);
  CMat m_gamma = qr_right.r.adjoint();

  CanonicalModel cm;
  cm.u_alpha = std::move(u_alpha);
  cm.v_gamma = std::move(v_gamma);
  cm.m_gamma = std::move(m_gamma);
  cm.r_alpha_t = qr_left.r.topLeftCorner(t, t);
  cm.r_alpha_x = qr_left.r.topRightCorner(t, r);
  cm.r_alpha_r = qr_left.r.bottomRightCorner(r, r);
  cm.partition = spec.partition();
  if (r_star.size() == 0) {
    cm.r = CMat::Identity(n, n);
  } else {
    require(r_star.rows() == n && r_star.cols() == n, Errc::DimensionMismatch,
            "canonicalize: covariance must be n x n");
    require(is_hermitian(r_star), Errc::NotPositiveDefinite,
            "canonicalize: covariance not Hermitian");
    cm.r = hermitized(cm.u_alpha.adjoint() * r_star * cm.u_alpha);
  }
  return cm;
}

/// Coordinates of the mean in the canonical frame: the pair (top-block
/// coordinates, signal-block coordinates).
inline std::pair<CMat, CMat> canonical_coordinates(const CanonicalModel& cm,
                                                   const CMat& b_t, const CMat& b_r) {
  CMat top = (cm.r_alpha_t * b_t + cm.r_alpha_x * b_r) * cm.m_gamma;
  CMat sig = cm.r_alpha_r * b_r * cm.m_gamma;
  return {std::move(top), std::move(sig)};
}

/// Draw one raw data matrix: the hypothesis mean plus disturbance with iid
/// proper complex Gaussian columns of covariance r_star.
inline CMat sample_raw(const ProblemSpec& spec, const TrueParams& params,
                       Hypothesis hypothesis, std::uint64_t seed) {
  spec.validate();
  params.validate(spec);
  const double sig = params.b_r.norm();
  if (hypothesis == Hypothesis::H0)
    require(sig == 0.0, Errc::LabelMismatch, "sample_raw: null label with nonzero b_r");
  else if (hypothesis == Hypothesis::H1)
    require(sig > 0.0, Errc::LabelMismatch, "sample_raw: alternative label with zero b_r");
  else
    fail(Errc::LabelMismatch, "sample_raw: hypothesis must be H0 or H1");

  CMat mean = spec.a_t * params.b_t * spec.c;
  if (hypothesis == Hypothesis::H1) mean += spec.a_r * params.b_r * spec.c;

  Rng rng(seed);
  CMat noise = linalg::hermitian_sqrt_inv(params.r_star).sqrt *
               rng.cgaussian_matrix(spec.n, spec.k);
  return mean + noise;
}

/// Rotate raw data into the canonical frame.
inline Dataset to_canonical(const CMat& x, const CanonicalModel& cm,
                            Hypothesis label = Hypothesis::Unknown) {
  const Index n = cm.partition.n();
  const Index k = cm.partition.k();
  require(x.rows() == n && x.cols() == k, Errc::DimensionMismatch,
          "to_canonical: data must be n x k");
  return {cm.u_alpha.adjoint() * x * cm.v_gamma, cm.partition, label};
}

/// Random nuisance draw: covariance scale * (W W^H / n + I), Gaussian b_t,
/// zero b_r.
inline TrueParams random_nuisance(const BlockPartition& partition, double scale,
                                  std::uint64_t seed) {
  partition.validate();
  require(scale > 0.0, Errc::DimensionMismatch, "random_nuisance: scale must be positive");
  const Index n = partition.n();
  Rng rng(seed);
  CMat w = rng.cgaussian_matrix(n, n);
  TrueParams p;
  p.r_star = hermitized(scale * (w * w.adjoint() / double(n) + CMat::Identity(n, n)));
  p.b_t = rng.cgaussian_matrix(partition.t, partition.m);
  p.b_r = CMat::Zero(partition.r, partition.m);
  return p;
}

/// Canonical selector geometry: identity-padded subspaces for the partition.
inline ProblemSpec canonical_spec(const BlockPartition& partition) {
  partition.validate();
  ProblemSpec spec;
  spec.n = partition.n();
  spec.k = partition.k();
  spec.m = partition.m;
  spec.t = partition.t;
  spec.r = partition.r;
  spec.a_t = CMat::Identity(spec.n, spec.n).leftCols(partition.t);
  spec.a_r = CMat::Identity(spec.n, spec.n).middleCols(partition.t, partition.r);
  spec.c = CMat::Zero(spec.m, spec.k);
  spec.c.leftCols(spec.m) = CMat::Identity(spec.m, spec.m);
  return spec;
}

/// Random full-rank geometry for the partition, deterministic per seed.
inline ProblemSpec random_spec(const BlockPartition& partition, std::uint64_t seed) {
  partition.validate();
  ProblemSpec spec;
  spec.n = partition.n();
  spec.k = partition.k();
  spec.m = partition.m;
  spec.t = partition.t;
  spec.r = partition.r;
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = Rng::derived(seed, attempt);
    spec.a_t = rng.cgaussian_matrix(spec.n, spec.t);
    spec.a_r = rng.cgaussian_matrix(spec.n, spec.r);
    spec.c = rng.cgaussian_matrix(spec.m, spec.k);
    try {
      spec.validate();
      return spec;
    } catch (const Error&) {
      require(attempt < 64, Errc::RankDeficient, "random_spec: no full-rank draw");
    }
  }
}

}  // namespace radinv::model
