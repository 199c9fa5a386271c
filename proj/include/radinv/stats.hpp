#pragma once
// Small sample-comparison toolkit for the Monte Carlo checks: two-sample
// Kolmogorov-Smirnov distance with asymptotic critical values, and the
// Pearson correlation coefficient.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "types.hpp"

namespace radinv::stats {

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
};

/// Asymptotic coefficient c(alpha) with exact table entries for the levels
/// used by the checks and the closed-form fallback elsewhere.
inline double ks_coefficient(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, Errc::DimensionMismatch,
          "ks_coefficient: alpha must lie in (0,1)");
  if (alpha == 0.01) return 1.628;
  if (alpha == 0.05) return 1.358;
  if (alpha == 0.10) return 1.224;
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

/// Sup distance between the two empirical CDFs, plus the critical value
/// c(alpha) * sqrt((n + m) / (n m)).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double alpha = 0.01) {
  require(!a.empty() && !b.empty(), Errc::EmptySample,
          "ks_two_sample: both samples must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / n - double(j) / m));
  }
  d = std::max(d, std::abs(1.0 - double(j) / m));
  d = std::max(d, std::abs(double(i) / n - 1.0));

  KsResult out;
  out.statistic = d;
  out.critical = ks_coefficient(alpha) * std::sqrt((n + m) / (n * m));
  return out;
}

inline double pearson_correlation(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  require(!a.empty() && !b.empty(), Errc::EmptySample,
          "pearson_correlation: empty sample");
  require(a.size() == b.size(), Errc::DimensionMismatch,
          "pearson_correlation: length mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace radinv::stats
