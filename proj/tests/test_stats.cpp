#include <catch2/catch_amalgamated.hpp>

#include <radinv/rng.hpp>
#include <radinv/stats.hpp>

#include "helpers.hpp"

using namespace radinv;
using namespace radinv::stats;
using testutil::expect_error;

TEST_CASE("identical samples have zero distance", "[stats][ks]") {
  const std::vector<double> a{0.3, 1.0, 2.5, -1.0};
  const auto r = ks_two_sample(a, a, 0.05);
  REQUIRE(r.statistic == 0.0);
  REQUIRE(r.critical > 0.0);
}

TEST_CASE("disjoint samples have distance one", "[stats][ks]") {
  std::vector<double> a, b;
  for (int i = 0; i < 50; ++i) {
    a.push_back(double(i) / 50.0);
    b.push_back(2.0 + double(i) / 50.0);
  }
  const auto r = ks_two_sample(a, b, 0.01);
  REQUIRE(r.statistic == 1.0);
  REQUIRE(r.statistic > r.critical);
}

TEST_CASE("tied values advance both walks together", "[stats][ks]") {
  const std::vector<double> a{1.0, 1.0, 2.0};
  const std::vector<double> b{1.0, 2.0, 2.0};
  const auto r = ks_two_sample(a, b, 0.05);
  REQUIRE(std::abs(r.statistic - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("same law samples land under the critical value", "[stats][ks]") {
  Rng rng(3);
  std::vector<double> a, b;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(rng.gaussian());
    b.push_back(rng.gaussian());
  }
  const auto r = ks_two_sample(a, b, 0.01);
  REQUIRE(r.statistic < r.critical);
}

TEST_CASE("critical coefficients use the exact table values", "[stats][ks]") {
  REQUIRE(ks_coefficient(0.01) == 1.628);
  REQUIRE(ks_coefficient(0.05) == 1.358);
  REQUIRE(ks_coefficient(0.10) == 1.224);
  REQUIRE(std::abs(ks_coefficient(0.02) - std::sqrt(-0.5 * std::log(0.01))) <= 1e-12);
  const auto r = ks_two_sample({1.0, 2.0}, {1.5}, 0.01);
  REQUIRE(std::abs(r.critical - 1.628 * std::sqrt(3.0 / 2.0)) <= 1e-12);
  expect_error(Errc::DimensionMismatch, [] { ks_coefficient(0.0); });
  expect_error(Errc::EmptySample, [] { ks_two_sample({}, {1.0}); });
}

TEST_CASE("correlation recognizes exact linear dependence", "[stats][pearson]") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> up{2.0, 4.0, 6.0, 8.0};
  const std::vector<double> down{4.0, 3.0, 2.0, 1.0};
  REQUIRE(std::abs(pearson_correlation(x, up) - 1.0) <= 1e-12);
  REQUIRE(std::abs(pearson_correlation(x, down) + 1.0) <= 1e-12);
  REQUIRE(pearson_correlation(x, {5.0, 5.0, 5.0, 5.0}) == 0.0);
  expect_error(Errc::DimensionMismatch, [&] { pearson_correlation(x, {1.0}); });
  expect_error(Errc::EmptySample, [] { pearson_correlation({}, {}); });
}

TEST_CASE("independent streams decorrelate", "[stats][pearson][montecarlo]") {
  Rng a(11), b(12);
  std::vector<double> xa, xb;
  for (int i = 0; i < 10000; ++i) {
    xa.push_back(a.gaussian());
    xb.push_back(b.gaussian());
  }
  REQUIRE(std::abs(pearson_correlation(xa, xb)) < 0.05);
}

TEST_CASE("seed derivation separates substreams deterministically", "[stats][rng]") {
  REQUIRE(derive_seed(1, 2) == derive_seed(1, 2));
  REQUIRE(derive_seed(1, 2) != derive_seed(1, 3));
  REQUIRE(derive_seed(1, 2) != derive_seed(2, 2));

  Rng r1(5), r2(5);
  for (int i = 0; i < 100; ++i) REQUIRE(r1.uniform() == r2.uniform());
}

TEST_CASE("uniform draws stay inside the open unit interval", "[stats][rng]") {
  Rng rng(6);
  double lo = 1.0, hi = 0.0, acc = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    acc += u;
  }
  REQUIRE(std::abs(acc / double(trials) - 0.5) <= 0.02);
  REQUIRE(lo < 0.01);
  REQUIRE(hi > 0.99);
}

TEST_CASE("gaussian draws have standard moments", "[stats][rng][montecarlo]") {
  Rng rng(7);
  double mean = 0.0, var = 0.0, cmean = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const double g = rng.gaussian();
    mean += g;
    var += g * g;
    cmean += std::norm(rng.cgaussian());
  }
  REQUIRE(std::abs(mean / double(trials)) <= 0.03);
  REQUIRE(std::abs(var / double(trials) - 1.0) <= 0.05);
  REQUIRE(std::abs(cmean / double(trials) - 1.0) <= 0.05);
}
