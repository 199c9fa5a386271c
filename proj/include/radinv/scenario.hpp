#pragma once
// Batch experiment driver: scenario files in JSON select a problem geometry,
// nuisance regime, hypothesis, and a list of Monte Carlo checks; running a
// scenario executes every check deterministically from the master seed and
// writes a JSON report plus a per-trial CSV of raw functionals.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "invariance.hpp"
#include "linalg.hpp"
#include "mis.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "secular.hpp"
#include "special.hpp"
#include "stats.hpp"
#include "types.hpp"

namespace radinv::scenario {

struct Dims {
  Index n = 0;
  Index k = 0;
  Index m = 1;
  Index t = 0;
  Index r = 1;

  BlockPartition partition() const { return {t, r, n - t - r, m, k - m}; }
};

struct SubspaceMode {
  bool canonical = true;
  std::uint64_t seed = 0;
};

struct NuisanceMode {
  bool random_draw = true;
  std::uint64_t seed = 0;
  double scale = 1.0;
  CMat r_star;  // fixed mode only
  CMat b_t;     // fixed mode only
};

struct HypothesisSpec {
  model::Hypothesis kind = model::Hypothesis::H0;
  CMat b_r;  // alternative only
};

struct Scenario {
  std::string name;
  Dims dims;
  SubspaceMode subspace;
  NuisanceMode nuisance;
  HypothesisSpec hypothesis;
  Index trials = 1;
  std::vector<std::string> checks;
  std::uint64_t master_seed = 0;
  double ks_alpha = 0.01;

  void validate() const;
};

struct CheckRecord {
  std::string check;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
  std::string property;
};

struct Report {
  std::string scenario_name;
  std::vector<CheckRecord> checks;
  bool all_pass = true;
  std::string report_path;
  std::string csv_path;
};

struct RunOptions {
  std::optional<Index> trials;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> check_filter;
  int threads = 1;
  bool write_outputs = true;
};

// ---------------------------------------------------------------------------
// Scenario parsing

namespace detail {

[[noreturn]] inline void bad_scenario(const std::string& message) {
  fail(Errc::InvalidScenario, "scenario: " + message);
}

inline const nlohmann::json& need(const nlohmann::json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) bad_scenario(std::string("missing field '") + field + "'");
  return *it;
}

inline Index need_index(const nlohmann::json& j, const char* field, Index lo) {
  const auto& v = need(j, field);
  if (!v.is_number_integer())
    bad_scenario(std::string("field '") + field + "' must be an integer");
  const Index x = v.get<Index>();
  if (x < lo)
    bad_scenario(std::string("field '") + field + "' below minimum " +
                 std::to_string(lo));
  return x;
}

inline std::uint64_t need_seed(const nlohmann::json& j, const char* field) {
  const auto& v = need(j, field);
  if (!v.is_number_integer())
    bad_scenario(std::string("field '") + field + "' must be an integer");
  return v.get<std::uint64_t>();
}

inline cplx parse_entry(const nlohmann::json& e, const char* field) {
  if (e.is_number()) return cplx(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return cplx(e[0].get<double>(), e[1].get<double>());
  bad_scenario(std::string("field '") + field +
               "' entries must be numbers or [re, im] pairs");
}

inline CMat parse_cmat(const nlohmann::json& j, Index rows, Index cols,
                       const char* field) {
  if (!j.is_array() || Index(j.size()) != rows)
    bad_scenario(std::string("field '") + field + "' must be an array of " +
                 std::to_string(rows) + " rows");
  CMat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[std::size_t(i)];
    if (!row.is_array() || Index(row.size()) != cols)
      bad_scenario(std::string("field '") + field + "' row " + std::to_string(i) +
                   " must have " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c)
      out(i, c) = parse_entry(row[std::size_t(c)], field);
  }
  return out;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) detail::bad_scenario("top level must be an object");
  Scenario sc;

  const auto& name = detail::need(j, "name");
  if (!name.is_string() || name.get<std::string>().empty())
    detail::bad_scenario("field 'name' must be a nonempty string");
  sc.name = name.get<std::string>();

  const auto& dims = detail::need(j, "dims");
  if (!dims.is_object()) detail::bad_scenario("field 'dims' must be an object");
  sc.dims.n = detail::need_index(dims, "N", 1);
  sc.dims.k = detail::need_index(dims, "K", 1);
  sc.dims.m = detail::need_index(dims, "M", 1);
  sc.dims.t = detail::need_index(dims, "t", 0);
  sc.dims.r = detail::need_index(dims, "r", 1);

  const auto& sub = detail::need(j, "subspace_mode");
  if (sub.is_string() && sub.get<std::string>() == "canonical") {
    sc.subspace.canonical = true;
  } else if (sub.is_object()) {
    const std::string mode = detail::need(sub, "mode").get<std::string>();
    if (mode == "canonical") {
      sc.subspace.canonical = true;
    } else if (mode == "random") {
      sc.subspace.canonical = false;
      sc.subspace.seed = detail::need_seed(sub, "seed");
    } else {
      detail::bad_scenario("subspace_mode.mode must be 'canonical' or 'random'");
    }
  } else {
    detail::bad_scenario("field 'subspace_mode' must be 'canonical' or an object");
  }

  const auto& nui = detail::need(j, "nuisance_mode");
  if (!nui.is_object()) detail::bad_scenario("field 'nuisance_mode' must be an object");
  {
    const std::string mode = detail::need(nui, "mode").get<std::string>();
    if (mode == "random") {
      sc.nuisance.random_draw = true;
      sc.nuisance.seed = detail::need_seed(nui, "seed");
      if (nui.contains("scale")) {
        if (!nui["scale"].is_number() || nui["scale"].get<double>() <= 0.0)
          detail::bad_scenario("nuisance_mode.scale must be a positive number");
        sc.nuisance.scale = nui["scale"].get<double>();
      }
    } else if (mode == "fixed") {
      sc.nuisance.random_draw = false;
      sc.nuisance.r_star = detail::parse_cmat(detail::need(nui, "r_star"), sc.dims.n,
                                              sc.dims.n, "nuisance_mode.r_star");
      sc.nuisance.b_t = detail::parse_cmat(detail::need(nui, "b_t"), sc.dims.t,
                                           sc.dims.m, "nuisance_mode.b_t");
    } else {
      detail::bad_scenario("nuisance_mode.mode must be 'random' or 'fixed'");
    }
  }

  const auto& hyp = detail::need(j, "hypothesis");
  std::string kind;
  if (hyp.is_string()) {
    kind = hyp.get<std::string>();
  } else if (hyp.is_object()) {
    kind = detail::need(hyp, "kind").get<std::string>();
  } else {
    detail::bad_scenario("field 'hypothesis' must be a string or an object");
  }
  if (kind == "H0") {
    sc.hypothesis.kind = model::Hypothesis::H0;
  } else if (kind == "H1") {
    sc.hypothesis.kind = model::Hypothesis::H1;
    if (!hyp.is_object() || !hyp.contains("b_r"))
      detail::bad_scenario("hypothesis H1 requires field 'b_r'");
    sc.hypothesis.b_r =
        detail::parse_cmat(hyp["b_r"], sc.dims.r, sc.dims.m, "hypothesis.b_r");
  } else {
    detail::bad_scenario("hypothesis.kind must be 'H0' or 'H1'");
  }

  sc.trials = detail::need_index(j, "trials", 1);
  const auto& checks = detail::need(j, "checks");
  if (!checks.is_array() || checks.empty())
    detail::bad_scenario("field 'checks' must be a nonempty array");
  for (const auto& c : checks) {
    if (!c.is_string()) detail::bad_scenario("entries of 'checks' must be strings");
    sc.checks.push_back(c.get<std::string>());
  }
  sc.master_seed = detail::need_seed(j, "master_seed");
  if (j.contains("ks_alpha")) {
    if (!j["ks_alpha"].is_number()) detail::bad_scenario("ks_alpha must be a number");
    sc.ks_alpha = j["ks_alpha"].get<double>();
    if (!(sc.ks_alpha > 0.0 && sc.ks_alpha < 1.0))
      detail::bad_scenario("ks_alpha must lie in (0,1)");
  }

  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::bad_scenario("cannot open file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    detail::bad_scenario(std::string("parse failure in '") + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Check harness

namespace detail {

/// Everything a check needs, derived once per scenario run.
struct Workspace {
  Scenario sc;
  BlockPartition part;
  model::ProblemSpec spec;
  model::TrueParams params;  // scenario nuisance with the scenario's b_r
  model::CanonicalModel cm;  // rotated covariance for params.r_star
  int threads = 1;
};

struct CheckOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  std::string property;
  std::vector<std::string> functionals;
  std::vector<std::vector<double>> values;  // [functional][trial]
};

template <typename Fn>
inline void parallel_trials(Index count, int threads, Fn&& fn) {
  const int workers =
      int(std::min<Index>(std::max(threads, 1), std::max<Index>(count, 1)));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline double tr_real(const CMat& a) { return a.real().trace(); }

inline double max_eig(const CMat& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline CMat random_unitary(Index d, std::uint64_t seed) {
  Rng rng(seed);
  return linalg::qr_decompose(rng.cgaussian_matrix(d, d)).q;
}

/// Draw raw data under the given parameters and reduce it to the sufficient
/// pair in the scenario's canonical frame.
inline invariance::SufficientStatistic pipeline_statistic(
    const Workspace& ws, const model::TrueParams& p, model::Hypothesis h,
    std::uint64_t seed) {
  const CMat x = model::sample_raw(ws.spec, p, h, seed);
  return mis::sufficient_statistic(model::to_canonical(x, ws.cm, h));
}

inline model::TrueParams null_params(const model::TrueParams& p,
                                     const BlockPartition& part) {
  model::TrueParams out = p;
  out.b_r = CMat::Zero(part.r, part.m);
  return out;
}

/// Synthetic sufficient pair with Wishart scatter, for checks that exercise
/// the statistic on arbitrary partitions rather than the scenario geometry.
inline invariance::SufficientStatistic synthetic_statistic(
    const BlockPartition& part, std::uint64_t seed) {
  Rng rng(seed);
  invariance::SufficientStatistic s;
  s.partition = part;
  s.z_c = rng.cgaussian_matrix(part.n(), part.m);
  const CMat w = rng.cgaussian_matrix(part.n(), part.km);
  s.s_c = hermitized(w * w.adjoint());
  return s;
}

inline double mis_deviation(const mis::MisValue& a, const mis::MisValue& b) {
  if (a.kind == mis::MisValue::Kind::Single)
    return rel_error(b.t, a.t);
  return std::max(rel_error(b.t_a, a.t_a), rel_error(b.t_b, a.t_b));
}

inline double scalar_deviation(double value, double ref) {
  return std::abs(value - ref) / std::max(1.0, std::abs(ref));
}

/// Second (B, R) pair sharing the induced invariant with (b_r, covariance of
/// ws.params): the whitened coordinate is re-dressed with the new conditional
/// root and mapped back through the new geometry factors.
struct MatchedPair {
  model::TrueParams params;
  model::CanonicalModel cm;
};

inline MatchedPair matched_invariant_pair(const Workspace& ws, const CMat& b_r1,
                                          std::uint64_t seed) {
  const Index r = ws.part.r, nj = ws.part.nj;
  const double scale = ws.sc.nuisance.random_draw ? ws.sc.nuisance.scale : 1.0;
  model::TrueParams p2 = model::random_nuisance(ws.part, scale, seed);
  model::CanonicalModel cm2 = model::canonicalize(ws.spec, p2.r_star);

  const CMat b1 = ws.cm.r_alpha_r * b_r1 * ws.cm.m_gamma;
  const auto sch1 =
      linalg::schur_complement(ws.cm.r.bottomRightCorner(r + nj, r + nj), r);
  const auto sch2 =
      linalg::schur_complement(cm2.r.bottomRightCorner(r + nj, r + nj), r);
  const CMat b2 = linalg::hermitian_sqrt_inv(sch2.complement).sqrt *
                  linalg::hermitian_sqrt_inv(sch1.complement).inv_sqrt * b1;
  p2.b_r = cm2.r_alpha_r.fullPivLu().solve(b2) *
           cm2.m_gamma.fullPivLu().inverse();
  return {std::move(p2), std::move(cm2)};
}

// ---------------------------------------------------------------------------
// Individual checks. Per-trial seeds derive from (check seed, trial index) so
// results are independent of scheduling and of which other checks run.

inline CheckOutcome check_invariance(const Workspace& ws, Index trials,
                                     std::uint64_t check_seed) {
  CheckOutcome out;
  out.threshold = 1e-8;
  out.property = "transformed data leave the invariant statistic unchanged";
  out.functionals = {"mis_deviation"};
  out.values.assign(1, std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto stat = pipeline_statistic(ws, ws.params, ws.sc.hypothesis.kind,
                                         derive_seed(s, 1));
    const auto g = invariance::random_group_element(ws.part, derive_seed(s, 2));
    const auto v0 = mis::compute_mis(stat);
    const auto v1 = mis::compute_mis(invariance::apply_action(g, stat));
    out.values[0][std::size_t(i)] = mis_deviation(v0, v1);
  });
  for (double v : out.values[0]) out.statistic = std::max(out.statistic, v);
  return out;
}

inline CheckOutcome check_maximality(const Workspace& ws, Index trials,
                                     std::uint64_t check_seed) {
  CheckOutcome out;
  out.threshold = 1e-6;
  out.property = "equal invariants imply a connecting group transformation";
  out.functionals = {"map_residual"};
  out.values.assign(1, std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto source = pipeline_statistic(ws, ws.params, ws.sc.hypothesis.kind,
                                           derive_seed(s, 1));
    const auto g0 = invariance::random_group_element(ws.part, derive_seed(s, 2));
    const auto target = invariance::apply_action(g0, source);
    const auto g = invariance::reconstruct_transformation(target, source);
    const auto mapped = invariance::apply_action(g, source);
    out.values[0][std::size_t(i)] = std::max(rel_error(mapped.z_c, target.z_c),
                                             rel_error(mapped.s_c, target.s_c));
  });
  for (double v : out.values[0]) out.statistic = std::max(out.statistic, v);
  return out;
}

inline CheckOutcome check_cfar_ks(const Workspace& ws, Index trials,
                                  std::uint64_t check_seed) {
  const bool pair = ws.part.nj > 0;
  const double scale = ws.sc.nuisance.random_draw ? ws.sc.nuisance.scale : 1.0;
  const model::TrueParams n1 = null_params(ws.params, ws.part);
  const model::TrueParams n2 =
      null_params(model::random_nuisance(ws.part, scale, derive_seed(check_seed, 11)),
                  ws.part);

  CheckOutcome out;
  out.threshold = 1.0;
  out.property =
      "signal-free invariant distribution does not depend on nuisance parameters";
  out.functionals = pair ? std::vector<std::string>{"tr_ta_n1", "tr_tb_n1",
                                                    "tr_ta_n2", "tr_tb_n2"}
                         : std::vector<std::string>{"tr_t_n1", "tr_t_n2"};
  out.values.assign(out.functionals.size(),
                    std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto v1 = mis::compute_mis(
        pipeline_statistic(ws, n1, model::Hypothesis::H0, derive_seed(s, 1)));
    const auto v2 = mis::compute_mis(
        pipeline_statistic(ws, n2, model::Hypothesis::H0, derive_seed(s, 2)));
    if (pair) {
      out.values[0][std::size_t(i)] = tr_real(v1.t_a);
      out.values[1][std::size_t(i)] = tr_real(v1.t_b);
      out.values[2][std::size_t(i)] = tr_real(v2.t_a);
      out.values[3][std::size_t(i)] = tr_real(v2.t_b);
    } else {
      out.values[0][std::size_t(i)] = tr_real(v1.t);
      out.values[1][std::size_t(i)] = tr_real(v2.t);
    }
  });
  if (pair) {
    const auto ka = stats::ks_two_sample(out.values[0], out.values[2], ws.sc.ks_alpha);
    const auto kb = stats::ks_two_sample(out.values[1], out.values[3], ws.sc.ks_alpha);
    out.statistic = std::max(ka.statistic / ka.critical, kb.statistic / kb.critical);
  } else {
    const auto k = stats::ks_two_sample(out.values[0], out.values[1], ws.sc.ks_alpha);
    out.statistic = k.statistic / k.critical;
  }
  return out;
}

inline CheckOutcome check_rep_equivalence(const Workspace& ws, Index trials,
                                          std::uint64_t check_seed) {
  const Index r = ws.part.r, nj = ws.part.nj;
  std::optional<CMat> b_w;
  if (ws.sc.hypothesis.kind == model::Hypothesis::H1) {
    const CMat b = ws.cm.r_alpha_r * ws.params.b_r * ws.cm.m_gamma;
    const auto sch =
        linalg::schur_complement(ws.cm.r.bottomRightCorner(r + nj, r + nj), r);
    b_w = linalg::hermitian_sqrt_inv(sch.complement).inv_sqrt * b;
  }

  CheckOutcome out;
  out.threshold = 1.0;
  out.property = "direct sampler matches the data pipeline in distribution";
  out.functionals = {"tr_t1a_direct", "tr_t1a_sampler"};
  out.values.assign(2, std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto v = mis::compute_mis(pipeline_statistic(
        ws, ws.params, ws.sc.hypothesis.kind, derive_seed(s, 1)));
    out.values[0][std::size_t(i)] = tr_real(mis::to_sample_coordinates(v).t_1a);
    const auto ms = mis::sample_mis(ws.part, b_w, derive_seed(s, 2));
    out.values[1][std::size_t(i)] = tr_real(ms.t_1a);
  });
  const auto k = stats::ks_two_sample(out.values[0], out.values[1], ws.sc.ks_alpha);
  out.statistic = k.statistic / k.critical;
  return out;
}

inline CheckOutcome check_induced_sufficiency(const Workspace& ws, Index trials,
                                              std::uint64_t check_seed) {
  const bool pair = ws.part.nj > 0;
  CMat b_r1 = ws.sc.hypothesis.b_r;
  if (ws.sc.hypothesis.kind != model::Hypothesis::H1) {
    Rng rng(derive_seed(check_seed, 7));
    b_r1 = rng.cgaussian_matrix(ws.part.r, ws.part.m);
  }
  model::TrueParams p1 = ws.params;
  p1.b_r = b_r1;
  const MatchedPair second =
      matched_invariant_pair(ws, b_r1, derive_seed(check_seed, 8));

  CheckOutcome out;
  out.threshold = 1.0;
  out.property =
      "parameter pairs sharing the induced invariant give matching distributions";
  out.functionals = pair ? std::vector<std::string>{"tr_ta_p1", "max_eig_ta_p1",
                                                    "tr_ta_p2", "max_eig_ta_p2"}
                         : std::vector<std::string>{"tr_t_p1", "max_eig_t_p1",
                                                    "tr_t_p2", "max_eig_t_p2"};
  out.values.assign(4, std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto v1 = mis::compute_mis(
        pipeline_statistic(ws, p1, model::Hypothesis::H1, derive_seed(s, 1)));
    const CMat x2 = model::sample_raw(ws.spec, second.params, model::Hypothesis::H1,
                                      derive_seed(s, 2));
    const auto v2 = mis::compute_mis(mis::sufficient_statistic(
        model::to_canonical(x2, second.cm, model::Hypothesis::H1)));
    const CMat& a1 = pair ? v1.t_a : v1.t;
    const CMat& a2 = pair ? v2.t_a : v2.t;
    out.values[0][std::size_t(i)] = tr_real(a1);
    out.values[1][std::size_t(i)] = max_eig(a1);
    out.values[2][std::size_t(i)] = tr_real(a2);
    out.values[3][std::size_t(i)] = max_eig(a2);
  });
  const auto kt = stats::ks_two_sample(out.values[0], out.values[2], ws.sc.ks_alpha);
  const auto ke = stats::ks_two_sample(out.values[1], out.values[3], ws.sc.ks_alpha);
  out.statistic = std::max(kt.statistic / kt.critical, ke.statistic / ke.critical);
  return out;
}

inline CheckOutcome check_independence(const Workspace& ws, Index trials,
                                       std::uint64_t check_seed) {
  CheckOutcome out;
  out.threshold = 0.05;
  out.property = "the two invariant branches are uncorrelated without signal";
  out.functionals = {"tr_t1a", "tr_t1b"};
  out.values.assign(2, std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto ms = mis::sample_mis(ws.part, std::nullopt, derive_seed(s, 1));
    out.values[0][std::size_t(i)] = tr_real(ms.t_1a);
    out.values[1][std::size_t(i)] = tr_real(ms.t_1b);
  });
  out.statistic = std::abs(stats::pearson_correlation(out.values[0], out.values[1]));
  return out;
}

inline CheckOutcome check_ancillarity(const Workspace& ws, Index trials,
                                      std::uint64_t check_seed) {
  CMat b_r_alt = ws.sc.hypothesis.b_r;
  if (ws.sc.hypothesis.kind != model::Hypothesis::H1) {
    Rng rng(derive_seed(check_seed, 7));
    b_r_alt = rng.cgaussian_matrix(ws.part.r, ws.part.m);
  }
  const model::TrueParams p0 = null_params(ws.params, ws.part);
  model::TrueParams p1 = ws.params;
  p1.b_r = b_r_alt;

  CheckOutcome out;
  out.threshold = 1.0;
  out.property = "ancillary branch distribution ignores the hypothesis";
  out.functionals = {"tr_tb_h0", "tr_tb_h1"};
  out.values.assign(2, std::vector<double>(std::size_t(trials), 0.0));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto v0 = mis::compute_mis(
        pipeline_statistic(ws, p0, model::Hypothesis::H0, derive_seed(s, 1)));
    const auto v1 = mis::compute_mis(
        pipeline_statistic(ws, p1, model::Hypothesis::H1, derive_seed(s, 2)));
    out.values[0][std::size_t(i)] = tr_real(v0.t_b);
    out.values[1][std::size_t(i)] = tr_real(v1.t_b);
  });
  const auto k = stats::ks_two_sample(out.values[0], out.values[1], ws.sc.ks_alpha);
  out.statistic = k.statistic / k.critical;
  return out;
}

inline CheckOutcome check_wishart_moments(const Workspace& ws, Index trials,
                                          std::uint64_t check_seed) {
  const bool pair = ws.part.nj > 0;
  const Index nj = ws.part.nj, r = ws.part.r, km = ws.part.km;

  CheckOutcome out;
  out.threshold = 0.05;
  out.property = "scatter draws have the stated first moments";
  out.functionals = pair ? std::vector<std::string>{"tr_s33", "tr_s23"}
                         : std::vector<std::string>{"tr_s22"};
  out.values.assign(out.functionals.size(),
                    std::vector<double>(std::size_t(trials), 0.0));

  std::vector<CMat> first, second;
  first.resize(std::size_t(trials));
  second.resize(std::size_t(trials));
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    if (pair) {
      first[std::size_t(i)] = mis::sample_complex_wishart(nj, km, derive_seed(s, 1));
      second[std::size_t(i)] =
          mis::sample_complex_wishart(r, km - nj, derive_seed(s, 2));
      out.values[0][std::size_t(i)] = tr_real(first[std::size_t(i)]);
      out.values[1][std::size_t(i)] = tr_real(second[std::size_t(i)]);
    } else {
      first[std::size_t(i)] = mis::sample_complex_wishart(r, km, derive_seed(s, 1));
      out.values[0][std::size_t(i)] = tr_real(first[std::size_t(i)]);
    }
  });

  auto mean_deviation = [trials](const std::vector<CMat>& draws, Index dim,
                                 double dof) {
    CMat sum = CMat::Zero(dim, dim);
    for (const CMat& w : draws) sum += w;
    const CMat ref = dof * CMat::Identity(dim, dim);
    return (sum / double(trials) - ref).norm() / ref.norm();
  };
  if (pair) {
    out.statistic = std::max(mean_deviation(first, nj, double(km)),
                             mean_deviation(second, r, double(km - nj)));
  } else {
    out.statistic = mean_deviation(first, r, double(km));
  }
  return out;
}

inline CheckOutcome check_special_equivalence(const Workspace& ws, Index trials,
                                              std::uint64_t check_seed) {
  CheckOutcome out;
  out.threshold = 1e-10;
  out.property = "closed forms agree with the general statistic";
  out.functionals = {"dev_pointlike",   "dev_vector_subspace",
                     "dev_subspace_interference", "dev_multidim",
                     "dev_range_spread", "dev_gmanova"};
  out.values.assign(6, std::vector<double>(std::size_t(trials), 0.0));

  // Fixed geometries, one per closed form.
  const BlockPartition pt{0, 1, 3, 1, 9};
  const BlockPartition vs{0, 2, 4, 1, 13};
  const BlockPartition si{2, 1, 3, 1, 13};
  const BlockPartition md{0, 3, 0, 2, 6};
  const BlockPartition rs{0, 1, 4, 3, 11};
  const BlockPartition gm{0, 2, 4, 2, 14};

  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    {
      const auto st = synthetic_statistic(pt, derive_seed(s, 1));
      const auto v = mis::compute_mis(st);
      const auto sp = special::mis_pointlike(st);
      out.values[0][std::size_t(i)] =
          std::max(scalar_deviation(sp.t_a, std::real(v.t_a(0, 0))),
                   scalar_deviation(sp.t_b, std::real(v.t_b(0, 0))));
    }
    {
      const auto st = synthetic_statistic(vs, derive_seed(s, 2));
      const auto v = mis::compute_mis(st);
      const auto sp = special::mis_vector_subspace(st);
      out.values[1][std::size_t(i)] =
          std::max(scalar_deviation(sp.t_a, std::real(v.t_a(0, 0))),
                   scalar_deviation(sp.t_b, std::real(v.t_b(0, 0))));
    }
    {
      const auto st = synthetic_statistic(si, derive_seed(s, 3));
      const auto v = mis::compute_mis(st);
      const auto sp = special::mis_subspace_interference(st);
      out.values[2][std::size_t(i)] =
          std::max(scalar_deviation(sp.t_a, std::real(v.t_a(0, 0))),
                   scalar_deviation(sp.t_b, std::real(v.t_b(0, 0))));
    }
    {
      const auto st = synthetic_statistic(md, derive_seed(s, 4));
      const auto v = mis::compute_mis(st);
      const auto sp = special::mis_multidim(st);
      out.values[3][std::size_t(i)] = rel_error(sp.t, v.t);
    }
    {
      const auto st = synthetic_statistic(rs, derive_seed(s, 5));
      const auto v = mis::compute_mis(st);
      const auto sp = special::mis_range_spread(st);
      out.values[4][std::size_t(i)] =
          std::max(rel_error(sp.t_a, v.t_a), rel_error(sp.t_b, v.t_b));
    }
    {
      const auto st = synthetic_statistic(gm, derive_seed(s, 6));
      const auto v = mis::compute_mis(st);
      const auto sp = special::mis_gmanova(st);
      out.values[5][std::size_t(i)] =
          std::max(rel_error(sp.t_a, v.t_a), rel_error(sp.t_b, v.t_b));
    }
  });
  for (const auto& column : out.values)
    for (double v : column) out.statistic = std::max(out.statistic, v);
  return out;
}

inline CheckOutcome check_eig_links(const Workspace& ws, Index trials,
                                    std::uint64_t check_seed) {
  CheckOutcome out;
  out.threshold = 1.0;
  out.property = "eigenvalue identities, unitary invariance, and the secular "
                 "round trip hold";
  out.functionals = {"link_dev", "unitary_dev", "secular_dev", "roundtrip_dev"};
  out.values.assign(4, std::vector<double>(std::size_t(trials), 0.0));

  const BlockPartition md{0, 4, 0, 2, 8};
  const BlockPartition rs{0, 1, 4, 3, 11};

  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));

    // Whitened-signal Gram spectra agree across the two orderings, and
    // survive a right unitary factor.
    const auto st_md = synthetic_statistic(md, derive_seed(s, 1));
    const auto link = special::eig_link_multidim(st_md);
    double link_dev = 0.0;
    for (Index e = 0; e < link.eig_t.size(); ++e)
      link_dev = std::max(link_dev, std::abs(link.eig_t(e) - link.eig_tc(e)) /
                                        std::max(1.0, link.eig_t.maxCoeff()));

    auto st_md_u = st_md;
    st_md_u.z_c = st_md.z_c * random_unitary(md.m, derive_seed(s, 2));
    const auto link_u = special::eig_link_multidim(st_md_u);
    double unitary_dev = 0.0;
    for (Index e = 0; e < link.eig_t.size(); ++e)
      unitary_dev =
          std::max(unitary_dev, std::abs(link.eig_t(e) - link_u.eig_t(e)) /
                                    std::max(1.0, link.eig_t.maxCoeff()));

    // Rank-one composite spectra: draw until both spectra are well separated.
    special::MatrixPair mp;
    special::CompositeEigs ce;
    for (std::uint64_t attempt = 0;; ++attempt) {
      require(attempt < 64, Errc::IllConditioned,
              "check eig_links: no well-separated draw");
      const auto st_rs =
          synthetic_statistic(rs, derive_seed(s, 100 + attempt));
      mp = special::mis_range_spread(st_rs);
      ce = special::composite_eig_statistic(mp.t_a, mp.t_b);
      double min_gap = std::numeric_limits<double>::infinity();
      for (Index e = 0; e + 1 < ce.eig_tb.size(); ++e)
        min_gap = std::min(min_gap, ce.eig_tb(e) - ce.eig_tb(e + 1));
      for (Index e = 0; e + 1 < ce.eig_sum.size(); ++e)
        min_gap = std::min(min_gap, ce.eig_sum(e) - ce.eig_sum(e + 1));
      if (min_gap > 1e-6) break;
    }

    Eigen::SelfAdjointEigenSolver<CMat> es_a(hermitized(mp.t_a));
    const Index last = mp.t_a.rows() - 1;
    const CVec a = es_a.eigenvectors().col(last) *
                   std::sqrt(std::max(es_a.eigenvalues()(last), 0.0));
    Eigen::SelfAdjointEigenSolver<CMat> es_b(hermitized(mp.t_b));
    const CVec k_asc = es_b.eigenvectors().adjoint() * a;

    const RVec lam_asc = es_b.eigenvalues();
    const RVec sum_secular = linalg::rank_one_update_eigs(lam_asc, k_asc);
    double secular_dev = 0.0;
    for (Index e = 0; e < sum_secular.size(); ++e)
      secular_dev =
          std::max(secular_dev, std::abs(sum_secular(e) - ce.eig_sum(e)) /
                                    std::max(1.0, ce.eig_sum.maxCoeff()));

    const RVec recovered = linalg::recover_k_magnitudes(ce.eig_tb, ce.eig_sum);
    double roundtrip_dev = 0.0;
    const double k_scale = std::max(1.0, k_asc.cwiseAbs().maxCoeff());
    for (Index e = 0; e < recovered.size(); ++e) {
      const double truth = std::abs(k_asc(k_asc.size() - 1 - e));
      roundtrip_dev =
          std::max(roundtrip_dev, std::abs(recovered(e) - truth) / k_scale);
    }

    // Composite spectra also ignore a right unitary factor on the data.
    auto st_rs_u = synthetic_statistic(rs, derive_seed(s, 3));
    {
      const auto mp0 = special::mis_range_spread(st_rs_u);
      const auto ce0 = special::composite_eig_statistic(mp0.t_a, mp0.t_b);
      st_rs_u.z_c = st_rs_u.z_c * random_unitary(rs.m, derive_seed(s, 4));
      const auto mp1 = special::mis_range_spread(st_rs_u);
      const auto ce1 = special::composite_eig_statistic(mp1.t_a, mp1.t_b);
      for (Index e = 0; e < ce0.eig_sum.size(); ++e) {
        unitary_dev = std::max(
            unitary_dev, std::abs(ce0.eig_sum(e) - ce1.eig_sum(e)) /
                             std::max(1.0, ce0.eig_sum.maxCoeff()));
        unitary_dev = std::max(
            unitary_dev, std::abs(ce0.eig_tb(e) - ce1.eig_tb(e)) /
                             std::max(1.0, ce0.eig_sum.maxCoeff()));
      }
    }

    out.values[0][std::size_t(i)] = link_dev;
    out.values[1][std::size_t(i)] = unitary_dev;
    out.values[2][std::size_t(i)] = secular_dev;
    out.values[3][std::size_t(i)] = roundtrip_dev;
  });

  double worst = 0.0;
  for (double v : out.values[0]) worst = std::max(worst, v / 1e-9);
  for (double v : out.values[1]) worst = std::max(worst, v / 1e-9);
  for (double v : out.values[2]) worst = std::max(worst, v / 1e-9);
  for (double v : out.values[3]) worst = std::max(worst, v / 1e-8);
  out.statistic = worst;
  return out;
}

inline CheckOutcome check_ranks(const Workspace& ws, Index trials,
                                std::uint64_t check_seed) {
  const bool pair = ws.part.nj > 0;
  CheckOutcome out;
  out.threshold = 0.5;
  out.property = "invariant branches have the stated ranks";
  out.functionals = pair ? std::vector<std::string>{"rank_ta", "rank_tb"}
                         : std::vector<std::string>{"rank_t"};
  out.values.assign(out.functionals.size(),
                    std::vector<double>(std::size_t(trials), 0.0));
  const Index want_a = std::min(ws.part.m, ws.part.r);
  const Index want_b = std::min(ws.part.m, ws.part.nj);
  parallel_trials(trials, ws.threads, [&](Index i) {
    const std::uint64_t s = derive_seed(check_seed, std::uint64_t(i));
    const auto v = mis::compute_mis(pipeline_statistic(
        ws, ws.params, ws.sc.hypothesis.kind, derive_seed(s, 1)));
    if (pair) {
      out.values[0][std::size_t(i)] = double(linalg::numerical_rank(v.t_a));
      out.values[1][std::size_t(i)] = double(linalg::numerical_rank(v.t_b));
    } else {
      out.values[0][std::size_t(i)] = double(linalg::numerical_rank(v.t));
    }
  });
  for (Index i = 0; i < trials; ++i) {
    out.statistic = std::max(
        out.statistic, std::abs(out.values[0][std::size_t(i)] - double(want_a)));
    if (pair)
      out.statistic = std::max(
          out.statistic, std::abs(out.values[1][std::size_t(i)] - double(want_b)));
  }
  return out;
}

using CheckFn = CheckOutcome (*)(const Workspace&, Index, std::uint64_t);

struct CheckDef {
  const char* name;
  CheckFn fn;
  bool needs_pair_branch;
};

inline const std::array<CheckDef, 11>& check_registry() {
  static const std::array<CheckDef, 11> defs = {{
      {"invariance", &check_invariance, false},
      {"maximality", &check_maximality, false},
      {"cfar_ks", &check_cfar_ks, false},
      {"rep_equivalence", &check_rep_equivalence, true},
      {"induced_sufficiency", &check_induced_sufficiency, false},
      {"independence", &check_independence, true},
      {"ancillarity", &check_ancillarity, true},
      {"wishart_moments", &check_wishart_moments, false},
      {"special_equivalence", &check_special_equivalence, false},
      {"eig_links", &check_eig_links, false},
      {"ranks", &check_ranks, false},
  }};
  return defs;
}

inline const CheckDef* find_check(const std::string& name) {
  for (const auto& def : check_registry())
    if (name == def.name) return &def;
  return nullptr;
}

inline std::size_t check_index(const CheckDef* def) {
  return std::size_t(def - check_registry().data());
}

}  // namespace detail

inline void Scenario::validate() const {
  if (name.empty()) detail::bad_scenario("name must be nonempty");
  if (trials < 1) detail::bad_scenario("trials must be at least 1");
  if (checks.empty()) detail::bad_scenario("checks must be nonempty");
  if (!(dims.r >= 1 && dims.m >= 1 && dims.t >= 0))
    detail::bad_scenario("dims: need r >= 1, M >= 1, t >= 0");
  if (dims.t + dims.r > dims.n) detail::bad_scenario("dims: t + r exceeds N");
  if (dims.k - dims.m < dims.n)
    detail::bad_scenario("dims: need K - M >= N signal-free columns");
  const Index nj = dims.n - dims.t - dims.r;
  for (const auto& c : checks) {
    const auto* def = detail::find_check(c);
    if (def == nullptr) detail::bad_scenario("unknown check '" + c + "'");
    if (def->needs_pair_branch && nj == 0)
      detail::bad_scenario("check '" + c + "' needs N > t + r");
  }
  if (hypothesis.kind == model::Hypothesis::H1) {
    if (hypothesis.b_r.rows() != dims.r || hypothesis.b_r.cols() != dims.m)
      detail::bad_scenario("hypothesis.b_r must be r x M");
    if (hypothesis.b_r.norm() == 0.0)
      detail::bad_scenario("hypothesis H1 requires nonzero b_r");
  }
  if (!nuisance.random_draw) {
    if (nuisance.r_star.rows() != dims.n || nuisance.r_star.cols() != dims.n)
      detail::bad_scenario("nuisance_mode.r_star must be N x N");
    if (nuisance.b_t.rows() != dims.t || nuisance.b_t.cols() != dims.m)
      detail::bad_scenario("nuisance_mode.b_t must be t x M");
  }
}

// ---------------------------------------------------------------------------
// Execution and reporting

namespace detail {

inline Workspace build_workspace(const Scenario& sc, int threads) {
  Workspace ws;
  ws.sc = sc;
  ws.part = sc.dims.partition();
  ws.part.validate();
  ws.spec = sc.subspace.canonical
                ? model::canonical_spec(ws.part)
                : model::random_spec(ws.part, sc.subspace.seed);
  if (sc.nuisance.random_draw) {
    ws.params = model::random_nuisance(ws.part, sc.nuisance.scale, sc.nuisance.seed);
  } else {
    ws.params.r_star = sc.nuisance.r_star;
    ws.params.b_t = sc.nuisance.b_t;
    ws.params.b_r = CMat::Zero(ws.part.r, ws.part.m);
  }
  if (sc.hypothesis.kind == model::Hypothesis::H1)
    ws.params.b_r = sc.hypothesis.b_r;
  ws.params.validate(ws.spec);
  ws.cm = model::canonicalize(ws.spec, ws.params.r_star);
  ws.threads = std::max(1, threads);
  return ws;
}

inline std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline Report run_scenario(const Scenario& input, const std::string& out_dir,
                           const RunOptions& options = {}) {
  Scenario sc = input;
  if (options.trials) sc.trials = *options.trials;
  if (options.seed) sc.master_seed = *options.seed;
  if (!options.check_filter.empty()) {
    std::vector<std::string> kept;
    for (const auto& want : options.check_filter) {
      bool found = false;
      for (const auto& have : sc.checks)
        if (have == want) found = true;
      if (!found)
        detail::bad_scenario("check filter '" + want + "' not in scenario checks");
      kept.push_back(want);
    }
    sc.checks = kept;
  }
  sc.validate();

  const detail::Workspace ws = detail::build_workspace(sc, options.threads);

  Report report;
  report.scenario_name = sc.name;
  std::vector<detail::CheckOutcome> outcomes;
  for (const auto& name : sc.checks) {
    const auto* def = detail::find_check(name);
    const std::uint64_t check_seed =
        derive_seed(sc.master_seed, 0x100 + std::uint64_t(detail::check_index(def)));
    const auto start = std::chrono::steady_clock::now();
    detail::CheckOutcome outcome = def->fn(ws, sc.trials, check_seed);
    const auto stop = std::chrono::steady_clock::now();

    CheckRecord rec;
    rec.check = name;
    rec.statistic = outcome.statistic;
    rec.threshold = outcome.threshold;
    rec.pass = outcome.statistic <= outcome.threshold;
    rec.runtime_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop -
                                                                              start)
            .count();
    rec.property = outcome.property;
    report.all_pass = report.all_pass && rec.pass;
    report.checks.push_back(std::move(rec));
    outcomes.push_back(std::move(outcome));
  }

  if (options.write_outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path report_path = fs::path(out_dir) / (sc.name + ".report.json");
    const fs::path csv_path = fs::path(out_dir) / (sc.name + ".raw.csv");

    nlohmann::ordered_json jr;
    jr["report_version"] = 1;
    jr["scenario"] = sc.name;
    jr["trials"] = sc.trials;
    jr["master_seed"] = sc.master_seed;
    jr["pass"] = report.all_pass;
    jr["checks"] = nlohmann::ordered_json::array();
    for (const auto& rec : report.checks) {
      nlohmann::ordered_json jc;
      jc["check"] = rec.check;
      jc["statistic"] = rec.statistic;
      jc["threshold"] = rec.threshold;
      jc["pass"] = rec.pass;
      jc["runtime_ms"] = rec.runtime_ms;
      jc["property"] = rec.property;
      jr["checks"].push_back(std::move(jc));
    }
    std::ofstream out_json(report_path);
    require(bool(out_json), Errc::InvalidScenario,
            "run_scenario: cannot write report file");
    out_json << jr.dump(2) << "\n";

    std::ofstream out_csv(csv_path);
    require(bool(out_csv), Errc::InvalidScenario,
            "run_scenario: cannot write CSV file");
    out_csv << "trial,functional,value\n";
    for (std::size_t c = 0; c < outcomes.size(); ++c) {
      const auto& outcome = outcomes[c];
      for (Index trial = 0; trial < sc.trials; ++trial)
        for (std::size_t f = 0; f < outcome.functionals.size(); ++f)
          out_csv << trial << ',' << report.checks[c].check << '.'
                  << outcome.functionals[f] << ','
                  << detail::format_value(outcome.values[f][std::size_t(trial)])
                  << '\n';
    }
    report.report_path = report_path.string();
    report.csv_path = csv_path.string();
  }
  return report;
}

inline Report run_scenario(const std::string& path, const std::string& out_dir,
                           const RunOptions& options = {}) {
  return run_scenario(load_scenario(path), out_dir, options);
}

}  // namespace radinv::scenario
