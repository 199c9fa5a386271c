#include <catch2/catch_amalgamated.hpp>

#include <radinv/linalg.hpp>

#include "helpers.hpp"

using namespace radinv;
using namespace radinv::linalg;
using testutil::expect_error;
using testutil::random_cmat;
using testutil::random_pd;

TEST_CASE("qr of a single basis vector is trivial", "[linalg][qr]") {
  CMat a = CMat::Zero(2, 1);
  a(0, 0) = 1.0;
  const auto qr = qr_decompose(a);
  REQUIRE(rel_error(qr.q, a) <= 1e-14);
  REQUIRE(qr.r.rows() == 1);
  REQUIRE(std::abs(qr.r(0, 0) - cplx(1.0, 0.0)) <= 1e-14);
}

TEST_CASE("qr of a scaled identity keeps the identity as q", "[linalg][qr]") {
  const CMat a = 2.0 * CMat::Identity(3, 3);
  const auto qr = qr_decompose(a);
  REQUIRE(rel_error(qr.q, CMat::Identity(3, 3)) <= 1e-14);
  REQUIRE(rel_error(qr.r, a) <= 1e-14);
}

TEST_CASE("qr reconstructs a random tall matrix", "[linalg][qr]") {
  const CMat a = random_cmat(5, 2, 11);
  const auto qr = qr_decompose(a);
  REQUIRE((a - qr.q * qr.r).norm() <= 1e-12 * a.norm());
  REQUIRE((qr.q.adjoint() * qr.q - CMat::Identity(2, 2)).norm() <= 1e-12);
  for (Index i = 0; i < 2; ++i) {
    REQUIRE(qr.r(i, i).real() > 0.0);
    REQUIRE(std::abs(qr.r(i, i).imag()) <= 1e-13 * qr.r.norm());
  }
  REQUIRE(std::abs(qr.r(1, 0)) == 0.0);
}

TEST_CASE("qr positive diagonal pins the factorization uniquely", "[linalg][qr]") {
  const CMat q0 = qr_decompose(random_cmat(6, 3, 12)).q;
  CMat r0 = random_cmat(3, 3, 15).triangularView<Eigen::Upper>();
  for (Index i = 0; i < 3; ++i) r0(i, i) = 1.0 + std::abs(r0(i, i));
  const auto qr = qr_decompose(q0 * r0);
  REQUIRE(rel_error(qr.q, q0) <= 1e-12);
  REQUIRE(rel_error(qr.r, r0) <= 1e-12);
}

TEST_CASE("qr rejects dependent columns", "[linalg][qr]") {
  CMat a(4, 2);
  a.col(0) = random_cmat(4, 1, 13);
  a.col(1) = 2.0 * a.col(0);
  expect_error(Errc::RankDeficient, [&] { qr_decompose(a); });
  expect_error(Errc::RankDeficient, [&] { qr_decompose(random_cmat(2, 3, 14)); });
}

TEST_CASE("completion of a square unitary returns it unchanged", "[linalg][completion]") {
  const CMat u = qr_decompose(random_cmat(3, 3, 21)).q;
  REQUIRE(rel_error(unitary_completion(u), u) <= 1e-13);
  REQUIRE(rel_error(unitary_completion(CMat::Identity(3, 3)), CMat::Identity(3, 3)) == 0.0);
}

TEST_CASE("completion of one basis vector yields a unitary with that first column",
          "[linalg][completion]") {
  CMat q = CMat::Zero(2, 1);
  q(1, 0) = 1.0;
  const CMat u = unitary_completion(q);
  REQUIRE(u.rows() == 2);
  REQUIRE(u.cols() == 2);
  REQUIRE((u.col(0) - q.col(0)).norm() <= 1e-14);
  REQUIRE((u.adjoint() * u - CMat::Identity(2, 2)).norm() <= 1e-13);
}

TEST_CASE("completion extends a random isometry", "[linalg][completion]") {
  const CMat q = qr_decompose(random_cmat(4, 2, 22)).q;
  const CMat u = unitary_completion(q);
  REQUIRE(u.rows() == 4);
  REQUIRE(u.cols() == 4);
  REQUIRE((u.leftCols(2) - q).norm() <= 1e-13);
  REQUIRE((u * u.adjoint() - CMat::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("completion rejects non-isometric input", "[linalg][completion]") {
  expect_error(Errc::NotIsometry, [] { unitary_completion(2.0 * CMat::Identity(3, 3)); });
  expect_error(Errc::NotIsometry, [] { unitary_completion(random_cmat(2, 3, 23)); });
}

TEST_CASE("svd of a padded identity has unit singular values", "[linalg][svd]") {
  const Index m = 3;
  CMat c = CMat::Zero(m, 7);
  c.leftCols(m) = CMat::Identity(m, m);
  const auto dec = svd(c);
  REQUIRE(dec.sigma.size() == m);
  REQUIRE((dec.sigma - RVec::Ones(m)).norm() <= 1e-13);
}

TEST_CASE("svd of a zero matrix has zero singular values", "[linalg][svd]") {
  const auto dec = svd(CMat::Zero(2, 5));
  REQUIRE(dec.sigma.norm() == 0.0);
  REQUIRE(dec.u.cols() == 2);
  REQUIRE(dec.v.cols() == 5);
}

TEST_CASE("svd reconstructs a random wide matrix", "[linalg][svd]") {
  const CMat c = random_cmat(2, 6, 31);
  const auto dec = svd(c);
  CMat sig = CMat::Zero(2, 6);
  for (Index i = 0; i < dec.sigma.size(); ++i) sig(i, i) = dec.sigma(i);
  REQUIRE((dec.u * sig * dec.v.adjoint() - c).norm() <= 1e-12 * c.norm());
  REQUIRE(dec.sigma(0) >= dec.sigma(1));
  REQUIRE((dec.u.adjoint() * dec.u - CMat::Identity(2, 2)).norm() <= 1e-12);
  REQUIRE((dec.v.adjoint() * dec.v - CMat::Identity(6, 6)).norm() <= 1e-12);
}

TEST_CASE("sqrt of the identity is the identity both ways", "[linalg][sqrt]") {
  const auto roots = hermitian_sqrt_inv(CMat::Identity(3, 3));
  REQUIRE(rel_error(roots.sqrt, CMat::Identity(3, 3)) <= 1e-14);
  REQUIRE(rel_error(roots.inv_sqrt, CMat::Identity(3, 3)) <= 1e-14);
}

TEST_CASE("sqrt of a diagonal matrix takes entrywise roots", "[linalg][sqrt]") {
  CMat s = CMat::Zero(2, 2);
  s(0, 0) = 4.0;
  s(1, 1) = 9.0;
  const auto roots = hermitian_sqrt_inv(s);
  CMat want = CMat::Zero(2, 2);
  want(0, 0) = 2.0;
  want(1, 1) = 3.0;
  REQUIRE(rel_error(roots.sqrt, want) <= 1e-13);
  want(0, 0) = 0.5;
  want(1, 1) = 1.0 / 3.0;
  REQUIRE(rel_error(roots.inv_sqrt, want) <= 1e-13);
}

TEST_CASE("sqrt squares back to the input on a random pd matrix", "[linalg][sqrt]") {
  const CMat s = random_pd(5, 41);
  const auto roots = hermitian_sqrt_inv(s);
  REQUIRE((roots.sqrt * roots.sqrt - s).norm() <= 1e-10 * s.norm());
  REQUIRE((roots.sqrt * roots.inv_sqrt - CMat::Identity(5, 5)).norm() <= 1e-10);
  REQUIRE(is_hermitian(roots.sqrt));
  REQUIRE(is_hermitian(roots.inv_sqrt));
}

TEST_CASE("sqrt rejects indefinite and non-hermitian input", "[linalg][sqrt]") {
  expect_error(Errc::NotPositiveDefinite, [] { hermitian_sqrt_inv(-CMat::Identity(2, 2)); });
  expect_error(Errc::NotPositiveDefinite, [] { hermitian_sqrt_inv(random_cmat(3, 3, 42)); });
  expect_error(Errc::DimensionMismatch, [] { hermitian_sqrt_inv(random_cmat(2, 3, 43)); });
}

TEST_CASE("schur complement of a block diagonal keeps the leading block",
          "[linalg][schur]") {
  const CMat a = random_pd(2, 51);
  const CMat d = random_pd(3, 52);
  CMat s = CMat::Zero(5, 5);
  s.topLeftCorner(2, 2) = a;
  s.bottomRightCorner(3, 3) = d;
  const auto sch = schur_complement(s, 2);
  REQUIRE(rel_error(sch.complement, a) <= 1e-12);
  REQUIRE(sch.coupling.norm() <= 1e-12);
}

TEST_CASE("schur complement of the identity is the identity", "[linalg][schur]") {
  const auto sch = schur_complement(CMat::Identity(4, 4), 1);
  REQUIRE(rel_error(sch.complement, CMat::Identity(1, 1)) <= 1e-14);
  REQUIRE(sch.coupling.norm() == 0.0);
}

TEST_CASE("schur complement satisfies the determinant identity", "[linalg][schur]") {
  const CMat s = random_pd(6, 53);
  const auto sch = schur_complement(s, 2);
  const cplx det_s = s.determinant();
  const cplx det_split =
      sch.complement.determinant() * s.bottomRightCorner(4, 4).determinant();
  REQUIRE(std::abs(det_s - det_split) <= 1e-9 * std::abs(det_s));
}

TEST_CASE("schur complement handles empty splits", "[linalg][schur]") {
  const CMat s = random_pd(3, 54);
  const auto all = schur_complement(s, 3);
  REQUIRE(rel_error(all.complement, hermitized(s)) <= 1e-13);
  const auto none = schur_complement(s, 0);
  REQUIRE(none.complement.rows() == 0);
}

TEST_CASE("schur complement rejects a singular trailing block", "[linalg][schur]") {
  CMat s = CMat::Zero(3, 3);
  s(0, 0) = 1.0;
  expect_error(Errc::NotPositiveDefinite, [&] { schur_complement(s, 1); });
  expect_error(Errc::DimensionMismatch, [] { schur_complement(random_cmat(2, 3, 55), 1); });
  expect_error(Errc::DimensionMismatch,
               [] { schur_complement(CMat::Identity(2, 2), 3); });
}

TEST_CASE("hermitian eigendecomposition is descending and reconstructs",
          "[linalg][eig]") {
  const CMat s = random_pd(5, 61);
  const auto dec = hermitian_eig(s);
  for (Index i = 0; i + 1 < 5; ++i) REQUIRE(dec.values(i) >= dec.values(i + 1));
  const CMat rebuilt =
      dec.vectors * dec.values.asDiagonal().toDenseMatrix().cast<cplx>() *
      dec.vectors.adjoint();
  REQUIRE(rel_error(rebuilt, hermitized(s)) <= 1e-12);
  REQUIRE((dec.vectors.adjoint() * dec.vectors - CMat::Identity(5, 5)).norm() <= 1e-12);
}

TEST_CASE("numerical rank counts the significant spectrum", "[linalg][rank]") {
  REQUIRE(numerical_rank(CMat::Zero(3, 3)) == 0);
  REQUIRE(numerical_rank(CMat::Identity(3, 3)) == 3);
  const CMat v = random_cmat(4, 1, 62);
  REQUIRE(numerical_rank(hermitized(v * v.adjoint())) == 1);
  const CMat w = random_cmat(5, 2, 63);
  REQUIRE(numerical_rank(hermitized(w * w.adjoint())) == 2);
}

TEST_CASE("reconstruction stays tight up to large sizes", "[linalg][property]") {
  for (Index n : {8, 16, 64}) {
    const CMat a = random_cmat(n, n, std::uint64_t(70 + n));
    const auto qr = qr_decompose(a);
    REQUIRE((a - qr.q * qr.r).norm() <= 1e-12 * a.norm());
    const CMat s = random_pd(n, std::uint64_t(80 + n));
    const auto roots = hermitian_sqrt_inv(s);
    REQUIRE((roots.sqrt * roots.sqrt - s).norm() <= 1e-12 * s.norm() * 10.0);
    const auto dec = svd(a);
    CMat sig = CMat::Zero(n, n);
    for (Index i = 0; i < n; ++i) sig(i, i) = dec.sigma(i);
    REQUIRE((dec.u * sig * dec.v.adjoint() - a).norm() <= 1e-12 * a.norm());
  }
}
