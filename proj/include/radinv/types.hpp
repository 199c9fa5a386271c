#pragma once
// Shared scalar and matrix aliases, the block partition bookkeeping used by
// every statistic, and the library error taxonomy.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace radinv {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Errc {
  RankDeficient,
  NotIsometry,
  NotPositiveDefinite,
  DimensionMismatch,
  InfeasibleSpectra,
  IllConditioned,
  NotEquivalent,
  UnsupportedBranch,
  InsufficientSecondaryData,
  LabelMismatch,
  NotRankOne,
  EmptySample,
  InvalidScenario,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotIsometry: return "NotIsometry";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InfeasibleSpectra: return "InfeasibleSpectra";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::NotEquivalent: return "NotEquivalent";
    case Errc::UnsupportedBranch: return "UnsupportedBranch";
    case Errc::InsufficientSecondaryData: return "InsufficientSecondaryData";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::NotRankOne: return "NotRankOne";
    case Errc::EmptySample: return "EmptySample";
    case Errc::InvalidScenario: return "InvalidScenario";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

/// Row split t / r / nj of the channel dimension and column split m / km of
/// the snapshot dimension. t and nj may be zero; nj == 0 is the single-branch
/// regime where the statistic collapses to one matrix.
struct BlockPartition {
  Index t = 0;
  Index r = 1;
  Index nj = 0;
  Index m = 1;
  Index km = 0;

  Index n() const { return t + r + nj; }
  Index j() const { return t + r; }
  Index k() const { return m + km; }
  bool single_branch() const { return nj == 0; }

  void validate() const {
    require(t >= 0 && nj >= 0, Errc::DimensionMismatch, "partition: negative block size");
    require(r >= 1, Errc::DimensionMismatch, "partition: r must be at least 1");
    require(m >= 1, Errc::DimensionMismatch, "partition: m must be at least 1");
    require(km >= t + r + nj, Errc::DimensionMismatch,
            "partition: km must be at least t + r + nj");
  }

  bool operator==(const BlockPartition& o) const {
    return t == o.t && r == o.r && nj == o.nj && m == o.m && km == o.km;
  }
  bool operator!=(const BlockPartition& o) const { return !(*this == o); }
};

inline CMat hermitized(const CMat& x) { return 0.5 * (x + x.adjoint()); }

inline bool is_hermitian(const CMat& x, double tol = 1e-10) {
  if (x.rows() != x.cols()) return false;
  return (x - x.adjoint()).norm() <= tol * x.norm() + 1e-14;
}

/// Frobenius distance scaled by the reference magnitude (absolute below unit
/// scale so zero references stay meaningful).
inline double rel_error(const CMat& x, const CMat& ref) {
  return (x - ref).norm() / std::max(1.0, ref.norm());
}

}  // namespace radinv
