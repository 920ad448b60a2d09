#pragma once

// Auditor-side machinery: baseline allocation rules, hypergradients of the
// under-detection gap through the developer's best response, feasible-set
// projections and the projected-gradient audit designer with its robust
// variant.

#include "spad/lower.hpp"
#include "spad/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spad {

namespace baseline {
struct Uniform {};
struct HarmProportional {};
struct WelfareProportional {};
struct UncertaintyFocused {
  Vector h_std;  // prior standard deviation of each h_j; required
};
struct Oracle {};
}  // namespace baseline

using BaselineKind = std::variant<baseline::Uniform, baseline::HarmProportional,
                                  baseline::WelfareProportional, baseline::UncertaintyFocused,
                                  baseline::Oracle>;

/// "UNIF", "HP", "WP", "UF" or "ORC".
std::string label(const BaselineKind& kind);

/// pi proportional to weights (normalised to one), eps proportional to
/// weights (normalised to eps_tot).
AuditPolicy proportional_policy(const Vector& weights, double eps_tot);

/// ORC returns AuditPolicy::full_detectability_reference: it is an
/// evaluation-only reference, never a feasible policy.
AuditPolicy baseline_policy(const BaselineKind& kind, const Environment& env);

// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex (sort-based).
Vector project_simplex(const Vector& v);

/// Simplex projection for pi; clamp-then-rescale for eps.
AuditPolicy project_policy(const Vector& pi_raw, const Vector& eps_raw, double eps_tot);

// ---------------------------------------------------------------------------

namespace hypergrad {
/// Implicit differentiation of the developer's KKT system.
struct Analytic {};
/// Forward differences through the best response.
struct FiniteDifference {
  double step = 1e-3;
};
}  // namespace hypergrad

using HypergradMode = std::variant<hypergrad::Analytic, hypergrad::FiniteDifference>;

struct Hypergradient {
  Vector grad_pi;
  Vector grad_eps;
  double bw = 0.0;                  // gap at the unperturbed policy
  BestResponse response;            // best response at the unperturbed policy
  bool used_finite_difference = false;
  bool fell_back = false;           // analytic requested but an m_j sat on the boundary
};

/// Partial derivatives of B_w with respect to pi_j and eps_j through the fully
/// strategic best response. Analytic mode falls back to forward differences
/// (step 1e-3) when any m_j is within 1e-8 of zero.
Hypergradient hypergradient(const Environment& env, const AuditPolicy& policy,
                            const HypergradMode& mode = hypergrad::Analytic{},
                            const FsOptions& fs_opts = {});

/// Forward-difference hypergradient through an arbitrary developer type.
Hypergradient finite_difference_hypergradient(const Environment& env, const AuditPolicy& policy,
                                              const DeveloperType& type, double step = 1e-3,
                                              const FsOptions& fs_opts = {});

/// B_w at the given (pi, eps) against a developer type. pi need not lie on the
/// simplex, which lets finite-difference oracles perturb single coordinates.
double gap_at(const Environment& env, const Vector& pi, const Vector& eps,
              const DeveloperType& type = developer::FullyStrategic{}, const FsOptions& fs_opts = {});

// ---------------------------------------------------------------------------

struct SpadOptions {
  std::optional<double> eta0;  // defaults to 0.1 * eps_tot
  double decay = 0.95;         // applied every decay_every iterations
  int decay_every = 20;
  double tol = 1e-4;           // stop when the gradient-mapping norm drops below
  int t_max = 200;
  int restarts = 5;
  HypergradMode hypergrad_mode = hypergrad::Analytic{};
  std::uint64_t rng_seed = 20260101;
  /// Developer the designer optimises against. Non-FS types use forward
  /// differences through their best response.
  DeveloperType target = developer::FullyStrategic{};
  /// Extra starting points, each run as an additional restart after the
  /// random ones.
  std::vector<AuditPolicy> extra_starts;
  /// Replaces the uniform start of restart 0 when set.
  std::optional<AuditPolicy> initial;
};

struct TraceRecord {
  int restart = 0;
  int iteration = 0;
  double bw = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  Vector pi;
  Vector eps;
};

struct OptimTrace {
  std::vector<TraceRecord> records;
  int selected_restart = -1;
  std::vector<double> restart_bw;  // best gap reached by each restart (NaN if it failed)
};

struct SpadResult {
  AuditPolicy policy;
  double bw = 0.0;
  int iterations = 0;  // outer iterations of the selected restart
  bool converged = false;
  OptimTrace trace;
};

/// Projected-gradient audit design with restarts. Each restart keeps its
/// best iterate; the restart with the lowest gap wins (ties go to the lower
/// restart index). Throws SolverError when every restart fails.
SpadResult spad(const Environment& env, const SpadOptions& opts = {});

/// Writes iteration,restart,B_w,grad_norm,step rows.
std::string trace_csv(const OptimTrace& trace);

// ---------------------------------------------------------------------------

struct WeightedType {
  DeveloperType type;
  double weight = 1.0;
};

struct RobustResult {
  AuditPolicy policy;
  double worst_bw = 0.0;
  std::vector<double> type_bw;   // gap of the returned policy against each type
  double weighted_bw = 0.0;      // weight-averaged gap, for reporting
  int rounds = 0;
  std::vector<int> worst_type_history;
  SpadResult inner;              // the designer run that produced the policy
};

/// Alternating min-max over a finite type set: a designer run against the
/// current worst-case type, then exact enumeration of the gap over all types.
RobustResult robust_spad(const Environment& env, const std::vector<WeightedType>& types,
                         const SpadOptions& opts = {});

}  // namespace spad
