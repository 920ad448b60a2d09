#pragma once

// Numerical property checks on the audit game: strategic blind spots under
// naive auditing, descent directions away from harm-proportional budgets, the
// two-dimension tight-budget trajectory, the non-proportional optimum and
// hypergradient consistency. Each check yields a JSON-serialisable report.

#include "spad/bench.hpp"
#include "spad/design.hpp"
#include "spad/model_io.hpp"

#include <string>
#include <vector>

namespace spad::verify {

enum class Status { Pass, Fail, NotApplicable };
std::string to_string(Status s);

struct VerificationReport {
  std::string check;
  std::string instance;
  Status status = Status::Fail;
  Json witness = Json::object();
  double tolerance = 0.0;

  bool ok() const { return status != Status::Fail; }
};

Json to_json(const VerificationReport& r);

// ---------------------------------------------------------------------------

enum class NaiveRule { Uniform, HarmProportional };
enum class NsRule { HarmProportional, WelfareHarmProportional };

/// gap = B_w(naive, m*) - B_w(naive, m_ns) with m_ns the budget-exhausting
/// non-strategic mitigation along h or w*h. Passes when gap > 0.
VerificationReport theorem1_gap(const Environment& env, NaiveRule naive, NsRule ns);

/// Same gap with an explicit non-strategic mitigation.
VerificationReport theorem1_gap_with(const Environment& env, const AuditPolicy& policy, const Vector& m_ns);

struct Theorem1GridOptions {
  int cells = 200;
  std::uint64_t master_seed = bench::kDefaultMasterSeed;
  int max_attempts_per_cell = 50;
};

/// Samples environments (heterogeneous kappa, Dirichlet welfare) until
/// `cells` pass the hypothesis screen: kappa spread >= 2, Kendall tau of
/// (w, delta) below one, every m*_j > 1e-6. Passes when every screened gap
/// is positive.
VerificationReport theorem1_grid(const Theorem1GridOptions& opts = {});

/// Kendall tau-a between two vectors.
double kendall_tau(const Vector& a, const Vector& b);

/// Fraction of active pairs with delta_j > delta_k that also have g_j < g_k
/// at the fully strategic response. One when there are no such pairs.
VerificationReport hypothesis_vi_fraction(const Environment& env, const AuditPolicy& policy);

/// Central-difference (step 1e-4) directional derivative of B_w at the
/// harm-proportional allocation along +1 at j* = argmax alpha' and -1 at
/// k* = argmin alpha over the remaining dimensions. Not applicable when alpha'
/// is homogeneous.
VerificationReport corollary_direction(const Environment& env);

struct TightBudgetThreshold {
  double eps_dagger = 0.0;
  Vector components;  // alpha_k^{-1}(c'_k(B/d) / h_k)
  bool defined = false;
};

TightBudgetThreshold tight_budget_threshold(const Environment& env);

/// For each eps_tot, a 41 x 41 grid over (pi_1, eps_1) with eps_2 = eps_tot - eps_1.
/// The deficit is the largest shortfall of the less-audited dimension's
/// welfare-weighted residual harm below min_k w_k h_k; the literal bound
/// min TRH >= min_k w_k h_k is reported alongside.
VerificationReport lower_bound_trajectory(const Environment& env2, const std::vector<double>& eps_tots,
                                          int grid = 41);

/// Reference instance for the trajectory check: h = (1,1), w = (2,1),
/// kappa = (1,1), quadratic cost, B = 1.
Environment lower_bound_reference_environment();

/// SPAD on d = 2, h = w = (1,1), kappa = (kappa1, kappa2), quadratic cost,
/// eps_tot = 2, B = 5. Passes when the more elastic dimension receives more
/// budget by 1e-3 and SPAD beats the harm-proportional split.
VerificationReport nonproportional_counterexample(double kappa1 = 2.0, double kappa2 = 1.0);

struct HypergradCheckOptions {
  int instances = 100;
  std::uint64_t seed = bench::kDefaultMasterSeed;
  double fd_step = 1e-5;
  double rel_tol = 1e-4;
  /// Components below this magnitude are compared absolutely.
  double abs_floor = 1e-6;
};

/// Analytic hypergradient against central differences through the exact
/// solver, on random interior instances, half with a slack budget and half
/// with a binding one.
VerificationReport hypergradient_consistency(const HypergradCheckOptions& opts = {});

// ---------------------------------------------------------------------------
// Ablation bands.

/// Mean SPAD-vs-UNIF reduction per eps_tot in {0.5, 1, 2, 5} inside [3, 18]
/// percent and WP rows identical to UNIF rows (uniform welfare, FS).
VerificationReport a1_bands(const std::vector<bench::ResultRow>& rows);

/// Dirichlet welfare: SPAD-vs-UNIF in [15, 50] and SPAD-vs-WP in [8, 25]
/// percent at eps_tot >= 0.5; at eps_tot = 0.1 the mean B_w of every rule
/// lies within 10% of the others.
VerificationReport a1b_bands(const std::vector<bench::ResultRow>& rows);

/// BR realized developer: SPAD-vs-UNIF mean reduction >= 0 and <= the FS
/// mean reduction on matched seeds at every eps_tot >= 0.5.
VerificationReport br_sign(const std::vector<bench::ResultRow>& rows);

// ---------------------------------------------------------------------------

struct CheckOptions {
  int cells = 200;  // theorem1 grid size
  int seeds = 20;   // per-configuration seeds for the band checks
  int workers = 1;
  std::uint64_t master_seed = bench::kDefaultMasterSeed;
};

/// theorem1, hyp-vi, corollary, lower-bound, counterexample, hypergrad,
/// a1-bands, a1b-bands, br-sign and all. "all" runs the first six; the band
/// checks run sweeps and are selected by name.
std::vector<std::string> check_names();
std::vector<VerificationReport> run_check(const std::string& name, const CheckOptions& opts = {});

/// Corollary suite: `instances` heterogeneous-kappa environments with equal
/// harms and welfare weights (derivative must be negative) followed by
/// `instances / 2` fully homogeneous controls (|derivative| <= 1e-8).
std::vector<VerificationReport> corollary_suite(int instances = 20,
                                                std::uint64_t seed = bench::kDefaultMasterSeed);

}  // namespace spad::verify
