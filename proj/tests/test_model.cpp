#include <catch2/catch_amalgamated.hpp>

#include <radinv/model.hpp>

#include "helpers.hpp"

using namespace radinv;
using namespace radinv::model;
using testutil::expect_error;
using testutil::random_cmat;
using testutil::random_pd;

TEST_CASE("canonical selector geometry is a fixed point", "[model][canonicalize]") {
  const BlockPartition part{1, 2, 2, 2, 12};
  const ProblemSpec spec = canonical_spec(part);
  const CanonicalModel cm = canonicalize(spec);
  REQUIRE((cm.u_alpha - CMat::Identity(5, 5)).norm() == 0.0);
  REQUIRE((cm.v_gamma - CMat::Identity(14, 14)).norm() == 0.0);
  REQUIRE((cm.m_gamma - CMat::Identity(2, 2)).norm() == 0.0);
  REQUIRE((cm.r_alpha_t - CMat::Identity(1, 1)).norm() == 0.0);
  REQUIRE((cm.r_alpha_r - CMat::Identity(2, 2)).norm() == 0.0);
  REQUIRE(cm.r_alpha_x.norm() == 0.0);
  REQUIRE((cm.r - CMat::Identity(5, 5)).norm() == 0.0);
}

TEST_CASE("doubling the signal directions doubles their triangular factor",
          "[model][canonicalize]") {
  const BlockPartition part{1, 2, 2, 2, 12};
  ProblemSpec spec = random_spec(part, 5);
  const CanonicalModel base = canonicalize(spec);
  spec.a_r *= 2.0;
  const CanonicalModel scaled = canonicalize(spec);
  REQUIRE(rel_error(scaled.u_alpha, base.u_alpha) <= 1e-11);
  REQUIRE(rel_error(scaled.r_alpha_r, 2.0 * base.r_alpha_r) <= 1e-11);
  REQUIRE(rel_error(scaled.r_alpha_t, base.r_alpha_t) <= 1e-11);
}

TEST_CASE("canonical factors reconstruct the geometry", "[model][canonicalize]") {
  const BlockPartition part{1, 2, 3, 2, 14};
  const ProblemSpec spec = random_spec(part, 6);
  const CanonicalModel cm = canonicalize(spec);

  CMat tri = CMat::Zero(3, 3);
  tri.topLeftCorner(1, 1) = cm.r_alpha_t;
  tri.topRightCorner(1, 2) = cm.r_alpha_x;
  tri.bottomRightCorner(2, 2) = cm.r_alpha_r;
  CMat joint(6, 3);
  joint << spec.a_t, spec.a_r;
  REQUIRE((cm.u_alpha.leftCols(3) * tri - joint).norm() <= 1e-11 * joint.norm());

  CMat selector = CMat::Zero(2, 16);
  selector.leftCols(2) = CMat::Identity(2, 2);
  REQUIRE((cm.m_gamma * selector * cm.v_gamma.adjoint() - spec.c).norm() <=
          1e-11 * spec.c.norm());

  REQUIRE((cm.u_alpha.adjoint() * cm.u_alpha - CMat::Identity(6, 6)).norm() <= 1e-12);
  REQUIRE((cm.v_gamma.adjoint() * cm.v_gamma - CMat::Identity(16, 16)).norm() <= 1e-12);
}

TEST_CASE("scaling the right factor scales only its square root", "[model][canonicalize]") {
  const BlockPartition part{0, 2, 3, 2, 12};
  ProblemSpec spec = random_spec(part, 7);
  const CanonicalModel base = canonicalize(spec);
  spec.c *= 3.0;
  const CanonicalModel scaled = canonicalize(spec);
  REQUIRE(rel_error(scaled.m_gamma, 3.0 * base.m_gamma) <= 1e-11);
  REQUIRE(rel_error(scaled.v_gamma, base.v_gamma) <= 1e-11);
}

TEST_CASE("the covariance rotates into the canonical frame", "[model][canonicalize]") {
  const BlockPartition part{1, 1, 2, 1, 9};
  const ProblemSpec spec = random_spec(part, 8);
  const CMat r_star = random_pd(4, 9);
  const CanonicalModel cm = canonicalize(spec, r_star);
  const CMat want = cm.u_alpha.adjoint() * r_star * cm.u_alpha;
  REQUIRE(rel_error(cm.r, hermitized(want)) <= 1e-12);
  expect_error(Errc::DimensionMismatch,
               [&] { canonicalize(spec, random_pd(3, 10)); });
  expect_error(Errc::NotPositiveDefinite,
               [&] { canonicalize(spec, random_cmat(4, 4, 11)); });
}

TEST_CASE("raw sampling is deterministic per seed", "[model][sample]") {
  const BlockPartition part{1, 1, 2, 2, 10};
  const ProblemSpec spec = random_spec(part, 12);
  TrueParams params = random_nuisance(part, 1.0, 13);
  const CMat a = sample_raw(spec, params, Hypothesis::H0, 99);
  const CMat b = sample_raw(spec, params, Hypothesis::H0, 99);
  const CMat c = sample_raw(spec, params, Hypothesis::H0, 100);
  REQUIRE((a - b).norm() == 0.0);
  REQUIRE((a - c).norm() > 0.0);
}

TEST_CASE("hypothesis labels must match the signal amplitude", "[model][sample]") {
  const BlockPartition part{1, 1, 2, 2, 10};
  const ProblemSpec spec = random_spec(part, 14);
  TrueParams null_params = random_nuisance(part, 1.0, 15);
  expect_error(Errc::LabelMismatch,
               [&] { sample_raw(spec, null_params, Hypothesis::H1, 1); });
  expect_error(Errc::LabelMismatch,
               [&] { sample_raw(spec, null_params, Hypothesis::Unknown, 1); });
  TrueParams alt = null_params;
  alt.b_r = random_cmat(1, 2, 16);
  expect_error(Errc::LabelMismatch, [&] { sample_raw(spec, alt, Hypothesis::H0, 1); });
  REQUIRE_NOTHROW(sample_raw(spec, alt, Hypothesis::H1, 1));
}

TEST_CASE("sample mean converges to the model mean", "[model][sample][montecarlo]") {
  const BlockPartition part{1, 1, 1, 1, 7};
  const ProblemSpec spec = random_spec(part, 17);
  TrueParams params = random_nuisance(part, 1.0, 18);
  params.b_r = random_cmat(1, 1, 19);
  const CMat mean = spec.a_t * params.b_t * spec.c + spec.a_r * params.b_r * spec.c;

  const int trials = 4000;
  CMat acc = CMat::Zero(3, 8);
  for (int i = 0; i < trials; ++i)
    acc += sample_raw(spec, params, Hypothesis::H1, 3000 + std::uint64_t(i));
  acc /= double(trials);

  // Entrywise complex variance is bounded by the largest covariance eigenvalue.
  Eigen::SelfAdjointEigenSolver<CMat> es(params.r_star, Eigen::EigenvaluesOnly);
  const double sd = std::sqrt(es.eigenvalues()(2) / double(trials));
  REQUIRE((acc - mean).cwiseAbs().maxCoeff() <= 3.0 * sd * 2.0);
}

TEST_CASE("sample columns carry the model covariance", "[model][sample][montecarlo]") {
  const BlockPartition part{0, 1, 2, 1, 7};
  const ProblemSpec spec = random_spec(part, 20);
  TrueParams params = random_nuisance(part, 1.0, 21);

  const int trials = 4000;
  CMat acc = CMat::Zero(3, 3);
  for (int i = 0; i < trials; ++i) {
    const CMat x = sample_raw(spec, params, Hypothesis::H0, 5000 + std::uint64_t(i));
    acc += x * x.adjoint();
  }
  acc /= double(trials * 8);
  REQUIRE(rel_error(acc, params.r_star) <= 0.05);
}

TEST_CASE("canonical rotation preserves norms and fixes the identity frame",
          "[model][canonical]") {
  const BlockPartition part{1, 2, 1, 2, 10};
  const ProblemSpec spec = canonical_spec(part);
  const CanonicalModel cm = canonicalize(spec);
  const CMat x = random_cmat(4, 12, 22);
  const Dataset d = to_canonical(x, cm, Hypothesis::Unknown);
  REQUIRE((d.z - x).norm() == 0.0);
  REQUIRE(d.partition == part);

  const ProblemSpec rspec = random_spec(part, 23);
  const CanonicalModel rcm = canonicalize(rspec);
  const Dataset rd = to_canonical(x, rcm);
  REQUIRE(std::abs(rd.z.norm() - x.norm()) <= 1e-11 * x.norm());
  REQUIRE(to_canonical(CMat::Zero(4, 12), rcm).z.norm() == 0.0);
  expect_error(Errc::DimensionMismatch, [&] { to_canonical(random_cmat(3, 12, 24), rcm); });
}

TEST_CASE("nuisance draws are deterministic and well conditioned", "[model][nuisance]") {
  const BlockPartition part{2, 1, 2, 2, 12};
  const TrueParams a = random_nuisance(part, 1.0, 30);
  const TrueParams b = random_nuisance(part, 1.0, 30);
  REQUIRE((a.r_star - b.r_star).norm() == 0.0);
  REQUIRE((a.b_t - b.b_t).norm() == 0.0);
  REQUIRE(a.b_r.norm() == 0.0);
  REQUIRE(a.b_t.rows() == 2);

  const TrueParams c = random_nuisance({0, 2, 1, 1, 8}, 1.0, 31);
  REQUIRE(c.b_t.rows() == 0);

  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    const double scale = (trial % 2 == 0) ? 1.0 : 4.0;
    const TrueParams p = random_nuisance(part, scale, 500 + trial);
    Eigen::SelfAdjointEigenSolver<CMat> es(p.r_star, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues()(0) >= scale);
    REQUIRE(is_hermitian(p.r_star));
  }
  expect_error(Errc::DimensionMismatch, [&] { random_nuisance(part, 0.0, 1); });
}

TEST_CASE("null data keeps rows below the interference block centered",
          "[model][sample][montecarlo]") {
  const BlockPartition part{1, 1, 2, 1, 9};
  const ProblemSpec spec = random_spec(part, 32);
  const CanonicalModel cm = canonicalize(spec);
  TrueParams params = random_nuisance(part, 1.0, 33);

  const int trials = 4000;
  CMat acc = CMat::Zero(4, 10);
  for (int i = 0; i < trials; ++i) {
    const CMat x = sample_raw(spec, params, Hypothesis::H0, 7000 + std::uint64_t(i));
    acc += to_canonical(x, cm, Hypothesis::H0).z;
  }
  acc /= double(trials);
  const double sd = std::sqrt(params.r_star.norm() / double(trials));
  REQUIRE(acc.bottomRows(3).cwiseAbs().maxCoeff() <= 3.0 * sd * 2.0);
}

TEST_CASE("random geometry draws are full rank and deterministic", "[model][spec]") {
  const BlockPartition part{2, 2, 2, 3, 12};
  const ProblemSpec a = random_spec(part, 40);
  const ProblemSpec b = random_spec(part, 40);
  REQUIRE((a.a_t - b.a_t).norm() == 0.0);
  REQUIRE((a.c - b.c).norm() == 0.0);
  REQUIRE_NOTHROW(a.validate());
}
