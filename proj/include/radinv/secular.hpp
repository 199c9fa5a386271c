#pragma once
// Spectrum of a Hermitian diagonal-plus-rank-one update and the inverse map
// recovering the update magnitudes from the two spectra.
//
// Forward: the eigenvalues of diag(lambda) + k k^H are the zeros of
//   w(s) = 1 + sum_n |k_n|^2 / (lambda_n - s),
// one in each open interval between consecutive base eigenvalues and one
// above the largest. Entries with negligible |k_n| and duplicated base
// eigenvalues are deflated before root finding; roots come from bisection
// with safeguarded Newton steps; the trace identity is checked on exit.
//
// Inverse: with both spectra in hand, the squared magnitudes solve a linear
// system with Cauchy-type rows, valid when the base eigenvalues are distinct
// and the spectra interlace.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "types.hpp"

namespace radinv::linalg {

namespace detail {

struct SecularNode {
  double lambda;
  double weight;
};

// Zero of 1 + sum w_n/(lambda_n - s) inside (lo, hi), where lo and hi are
// consecutive poles or the top pole and a finite upper bound.
inline double secular_root(const std::vector<SecularNode>& nodes, double lo, double hi) {
  const double span = std::max({1.0, std::abs(lo), std::abs(hi)});
  const double shrink = 1e-14 * span;
  double a = lo + shrink;
  double b = hi - shrink;
  if (a >= b) return 0.5 * (lo + hi);

  auto eval = [&nodes](double s, double& f, double& fp) {
    f = 1.0;
    fp = 0.0;
    for (const auto& nd : nodes) {
      const double d = nd.lambda - s;
      f += nd.weight / d;
      fp += nd.weight / (d * d);
    }
  };

  double fa, fb, dummy;
  eval(a, fa, dummy);
  eval(b, fb, dummy);
  if (fa >= 0.0) return a;
  if (fb <= 0.0) return b;

  double x = 0.5 * (a + b);
  for (int it = 0; it < 160; ++it) {
    double f, fp;
    eval(x, f, fp);
    if (f == 0.0) return x;
    if (f < 0.0)
      a = x;
    else
      b = x;
    if (b - a <= 1e-15 * std::max(1.0, std::max(std::abs(a), std::abs(b)))) break;
    double step = x - f / fp;
    x = (step > a && step < b) ? step : 0.5 * (a + b);
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Eigenvalues of diag(lambda_b) + k k^H, descending. Input order is free.
inline RVec rank_one_update_eigs(const RVec& lambda_b, const CVec& k) {
  const Index m = lambda_b.size();
  require(k.size() == m, Errc::DimensionMismatch,
          "rank_one_update_eigs: spectrum and update lengths differ");
  if (m == 0) return RVec(0);

  const double knorm = k.norm();
  const double deflate = 1e-12 * knorm;
  const double scale =
      std::max({1.0, lambda_b.cwiseAbs().maxCoeff(), knorm * knorm});
  const double merge_tol = 1e-12 * scale;

  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return lambda_b(a) < lambda_b(b); });

  std::vector<detail::SecularNode> nodes;
  std::vector<double> passthrough;
  for (Index pos = 0; pos < m;) {
    Index end = pos;
    while (end + 1 < m &&
           lambda_b(order[end + 1]) - lambda_b(order[pos]) <= merge_tol)
      ++end;
    double weight = 0.0;
    double lam = 0.0;
    for (Index q = pos; q <= end; ++q) {
      lam += lambda_b(order[q]);
      const double mag = std::abs(k(order[q]));
      if (mag > deflate) weight += mag * mag;
    }
    lam /= double(end - pos + 1);
    if (weight > 0.0) {
      nodes.push_back({lam, weight});
      for (Index q = pos; q < end; ++q) passthrough.push_back(lam);
    } else {
      for (Index q = pos; q <= end; ++q) passthrough.push_back(lam);
    }
    pos = end + 1;
  }

  std::vector<double> out(passthrough);
  const Index d = Index(nodes.size());
  if (d == 1) {
    out.push_back(nodes[0].lambda + nodes[0].weight);
  } else if (d > 1) {
    double total = 0.0;
    for (const auto& nd : nodes) total += nd.weight;
    for (Index i = 0; i + 1 < d; ++i)
      out.push_back(detail::secular_root(nodes, nodes[i].lambda, nodes[i + 1].lambda));
    out.push_back(
        detail::secular_root(nodes, nodes[d - 1].lambda, nodes[d - 1].lambda + total));
  }

  std::sort(out.begin(), out.end(), std::greater<double>());
  RVec result(m);
  for (Index i = 0; i < m; ++i) result(i) = out[size_t(i)];

  const double target = lambda_b.sum() + knorm * knorm;
  require(std::abs(result.sum() - target) <= 1e-9 * std::max(1.0, std::abs(target)),
          Errc::IllConditioned, "rank_one_update_eigs: trace identity violated");
  return result;
}

/// Magnitudes |k_n| reproducing lambda_sum as the rank-one update of
/// lambda_b. Output entries align with the input order of lambda_b.
inline RVec recover_k_magnitudes(const RVec& lambda_b, const RVec& lambda_sum) {
  const Index m = lambda_b.size();
  require(lambda_sum.size() == m, Errc::DimensionMismatch,
          "recover_k_magnitudes: spectrum lengths differ");
  if (m == 0) return RVec(0);

  const double scale = std::max(
      {1.0, lambda_b.cwiseAbs().maxCoeff(), lambda_sum.cwiseAbs().maxCoeff()});
  const double gap_tol = 1e-10 * scale;
  const double slack = 1e-9 * scale;
  const double fixed_tol = 1e-12 * scale;

  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return lambda_b(a) > lambda_b(b); });
  RVec base(m), updated(m);
  for (Index i = 0; i < m; ++i) base(i) = lambda_b(order[i]);
  updated = lambda_sum;
  std::sort(updated.data(), updated.data() + m, std::greater<double>());

  for (Index i = 0; i + 1 < m; ++i)
    require(base(i) - base(i + 1) > gap_tol, Errc::IllConditioned,
            "recover_k_magnitudes: base eigenvalues nearly coincide");

  require(updated(0) >= base(0) - slack, Errc::InfeasibleSpectra,
          "recover_k_magnitudes: spectra do not interlace");
  for (Index i = 1; i < m; ++i)
    require(updated(i) >= base(i) - slack && updated(i) <= base(i - 1) + slack,
            Errc::InfeasibleSpectra, "recover_k_magnitudes: spectra do not interlace");

  std::vector<Index> active;
  for (Index i = 0; i < m; ++i)
    if (updated(i) - base(i) > fixed_tol) active.push_back(i);

  RVec eps = RVec::Zero(m);
  if (!active.empty()) {
    const Index d = Index(active.size());
    Eigen::MatrixXd sys(d, d);
    for (Index row = 0; row < d; ++row)
      for (Index col = 0; col < d; ++col) {
        const double denom = base(active[size_t(col)]) - updated(active[size_t(row)]);
        require(std::abs(denom) > fixed_tol, Errc::IllConditioned,
                "recover_k_magnitudes: spectra touch off the fixed-point diagonal");
        sys(row, col) = 1.0 / denom;
      }
    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(d, -1.0);
    Eigen::VectorXd sol = sys.partialPivLu().solve(rhs);
    for (Index i = 0; i < d; ++i) {
      double w = sol(i);
      require(w > -1e-8 * scale, Errc::InfeasibleSpectra,
              "recover_k_magnitudes: negative squared magnitude");
      eps(active[size_t(i)]) = std::max(w, 0.0);
    }
  }

  RVec out(m);
  for (Index i = 0; i < m; ++i) out(order[i]) = std::sqrt(eps(i));
  return out;
}

}  // namespace radinv::linalg
