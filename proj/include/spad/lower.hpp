#pragma once

// Developer best responses to a committed audit policy. The developer
// minimises sum_j delta_j g_j(h_j, m_j) + C(m) over m >= 0 with C(m) <= B,
// where delta_j = pi_j alpha_j(eps_j) is the effective detectability.

#include "spad/model.hpp"

#include <optional>
#include <string>
#include <variant>

namespace spad {

/// Raised when an iterative solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BestResponse {
  Vector m;
  double lambda = 0.0;        // budget multiplier; always 0 for BR and NS
  double objective = 0.0;     // sum delta_j g_j + C(m)
  double cost_used = 0.0;     // C(m)
  double kkt_residual = 0.0;  // max_j |delta_j |g1_j| - (1 + lambda) c1_j| over active j
  bool converged = false;
  int iterations = 0;
};

namespace developer {

struct FullyStrategic {
  double tol = 1e-6;
};

struct BoundedlyRational {
  int steps = 50;
  double eta = 0.05;
};

struct NonStrategic {};

}  // namespace developer

using DeveloperType =
    std::variant<developer::FullyStrategic, developer::BoundedlyRational, developer::NonStrategic>;

/// "FS", "BR" or "NS".
std::string label(const DeveloperType& type);

struct FsOptions {
  double tol = 1e-6;
  /// Bisection on the budget multiplier stops once B - C(m) <= budget_rel_tol * B.
  /// Zero runs the bisection to floating-point resolution.
  double budget_rel_tol = 1e-10;
  /// Warm start for the multiplier bracket.
  std::optional<double> lambda_hint;
};

double total_cost(const Environment& env, const Vector& m);
double developer_objective(const Environment& env, const Vector& delta, const Vector& m);

/// Exact best response by dual bisection over the budget multiplier with a
/// safeguarded Newton solve of each dimension's first-order condition.
BestResponse solve_fs(const Environment& env, const AuditPolicy& policy, const FsOptions& opts = {});
BestResponse solve_fs_detectability(const Environment& env, const Vector& delta,
                                    const FsOptions& opts = {});

/// K projected-gradient steps with Armijo backtracking from (B/d) * 1.
BestResponse solve_br(const Environment& env, const AuditPolicy& policy, int steps = 50,
                      double eta = 0.05);
BestResponse solve_br_detectability(const Environment& env, const Vector& delta, int steps = 50,
                                    double eta = 0.05);

/// m_j = s * w_j * h_j with s chosen so that C(m) = B.
Vector solve_ns(const Environment& env);

/// s * direction with C(s * direction) = B. Direction must be non-negative
/// and not identically zero.
Vector budget_exhausting_mitigation(const Environment& env, const Vector& direction);

/// Clamps negatives to zero, then scales radially onto C(m) = B if the budget
/// is exceeded.
Vector project_cost_feasible(const Environment& env, const Vector& m_raw);

/// Dispatches on the developer type.
BestResponse best_response(const Environment& env, const AuditPolicy& policy,
                           const DeveloperType& type, const FsOptions& fs_opts = {});
BestResponse best_response_detectability(const Environment& env, const Vector& delta,
                                         const DeveloperType& type, const FsOptions& fs_opts = {});

}  // namespace spad
