#include "spad/lower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spad {

namespace {

constexpr int kMaxBisection = 200;

void check_shapes(const Environment& env, const Vector& v, const char* what) {
  if (v.size() != env.dim()) {
    throw ContractError(std::string(what) + ": dimension does not match environment");
  }
}

// Root in m >= 0 of (1 + lambda) c'(m) - delta |g'(m)|, which is
// non-decreasing in m when c and g are convex.
double solve_dimension(const Environment& env, int j, double delta, double lambda) {
  if (delta <= 0.0) return 0.0;
  const double scale = 1.0 + lambda;
  const CostSpec& cost = env.cost[j];
  const HarmResponseSpec& resp = env.harm_resp[j];
  const double h = env.h[j];
  auto foc = [&](double m) {
    const Cost c = eval_cost(cost, m);
    const ResidualHarm g = eval_residual_harm(resp, h, m);
    return std::pair{scale * c.c1 + delta * g.g1, scale * c.c2 + delta * g.g2};
  };
  if (foc(0.0).first >= 0.0) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 2000 && foc(hi).first < 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto [f, df] = foc(x);
    if (f == 0.0) return x;
    (f < 0.0 ? lo : hi) = x;
    double next = df > 0.0 ? x - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return next;
    }
    x = next;
  }
  return x;
}

Vector mitigation_at(const Environment& env, const Vector& delta, double lambda) {
  Vector m(env.dim());
  for (int j = 0; j < env.dim(); ++j) m[j] = solve_dimension(env, j, delta[j], lambda);
  return m;
}

double kkt_residual(const Environment& env, const Vector& delta, const Vector& m, double lambda) {
  double worst = 0.0;
  for (int j = 0; j < env.dim(); ++j) {
    const Cost c = eval_cost(env.cost[j], m[j]);
    const ResidualHarm g = eval_residual_harm(env.harm_resp[j], env.h[j], m[j]);
    const double r = delta[j] * std::abs(g.g1) - (1.0 + lambda) * c.c1;
    // inactive dimensions only need dual feasibility
    worst = std::max(worst, m[j] > 0.0 ? std::abs(r) : std::max(r, 0.0));
  }
  return worst;
}

BestResponse finish(const Environment& env, const Vector& delta, Vector m, double lambda) {
  BestResponse out;
  out.cost_used = total_cost(env, m);
  out.objective = developer_objective(env, delta, m);
  out.lambda = lambda;
  out.m = std::move(m);
  return out;
}

}  // namespace

std::string label(const DeveloperType& type) {
  if (std::holds_alternative<developer::FullyStrategic>(type)) return "FS";
  if (std::holds_alternative<developer::BoundedlyRational>(type)) return "BR";
  return "NS";
}

double total_cost(const Environment& env, const Vector& m) {
  double c = 0.0;
  for (int j = 0; j < env.dim(); ++j) c += eval_cost(env.cost[j], m[j]).c;
  return c;
}

double developer_objective(const Environment& env, const Vector& delta, const Vector& m) {
  double f = 0.0;
  for (int j = 0; j < env.dim(); ++j) {
    f += delta[j] * eval_residual_harm(env.harm_resp[j], env.h[j], m[j]).g +
         eval_cost(env.cost[j], m[j]).c;
  }
  return f;
}

BestResponse solve_fs_detectability(const Environment& env, const Vector& delta,
                                    const FsOptions& opts) {
  check_shapes(env, delta, "solve_fs");
  for (const auto& c : env.cost) {
    if (!c.strictly_convex()) throw ContractError("solve_fs: every cost must be strictly convex");
  }
  const double budget = env.budget;
  auto cost_at = [&](double lambda, Vector& m) {
    m = mitigation_at(env, delta, lambda);
    return total_cost(env, m);
  };

  Vector m;
  if (cost_at(0.0, m) <= budget) {
    BestResponse out = finish(env, delta, std::move(m), 0.0);
    out.kkt_residual = kkt_residual(env, delta, out.m, 0.0);
    out.converged = out.kkt_residual <= opts.tol;
    return out;
  }

  // Bracket the multiplier: cost(lo) > B >= cost(hi).
  double lo = 0.0;
  double hi = 1.0;
  Vector m_hi;
  if (opts.lambda_hint && *opts.lambda_hint > 0.0) {
    hi = *opts.lambda_hint;
    if (cost_at(hi, m_hi) > budget) {
      lo = hi;
      hi *= 2.0;
    } else {
      lo = 0.5 * hi;
      Vector scratch;
      while (lo > 1e-300 && cost_at(lo, scratch) <= budget) {
        hi = lo;
        m_hi = scratch;
        lo *= 0.5;
      }
      if (lo <= 1e-300) lo = 0.0;
    }
  }
  int expansions = 0;
  while (cost_at(hi, m_hi) > budget) {
    if (++expansions > 2000) throw SolverError("solve_fs: could not bracket the budget multiplier");
    lo = hi;
    hi *= 2.0;
  }

  double gap = budget - total_cost(env, m_hi);
  int iterations = 0;
  for (; iterations < kMaxBisection; ++iterations) {
    if (gap <= opts.budget_rel_tol * budget) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Vector m_mid;
    const double c = cost_at(mid, m_mid);
    if (c > budget) {
      lo = mid;
    } else {
      hi = mid;
      m_hi = std::move(m_mid);
      gap = budget - c;
    }
  }
  if (gap > 1e-10 * budget) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_fs: budget bisection did not converge after " << iterations
       << " steps (lambda in [" << lo << ", " << hi << "], budget gap " << gap << ")";
    throw SolverError(os.str());
  }

  BestResponse out = finish(env, delta, std::move(m_hi), hi);
  out.iterations = iterations;
  out.kkt_residual = kkt_residual(env, delta, out.m, hi);
  out.converged = out.kkt_residual <= opts.tol;
  return out;
}

BestResponse solve_fs(const Environment& env, const AuditPolicy& policy, const FsOptions& opts) {
  return solve_fs_detectability(env, effective_detectability(env, policy), opts);
}

Vector project_cost_feasible(const Environment& env, const Vector& m_raw) {
  check_shapes(env, m_raw, "project_cost_feasible");
  Vector m = m_raw.cwiseMax(0.0);
  if (total_cost(env, m) <= env.budget) return m;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (total_cost(env, mid * m) > env.budget ? hi : lo) = mid;
  }
  return lo * m;
}

BestResponse solve_br_detectability(const Environment& env, const Vector& delta, int steps,
                                    double eta) {
  check_shapes(env, delta, "solve_br");
  if (steps < 0) throw ContractError("solve_br: step count must be non-negative");
  if (!(eta > 0.0)) throw ContractError("solve_br: step size must be positive");
  constexpr double kArmijoSlope = 1e-4;
  constexpr int kMaxHalvings = 30;

  const int d = env.dim();
  auto gradient = [&](const Vector& m) {
    Vector g(d);
    for (int j = 0; j < d; ++j) {
      g[j] = delta[j] * eval_residual_harm(env.harm_resp[j], env.h[j], m[j]).g1 +
             eval_cost(env.cost[j], m[j]).c1;
    }
    return g;
  };

  Vector m = project_cost_feasible(env, Vector::Constant(d, env.budget / d));
  for (int k = 0; k < steps; ++k) {
    const Vector grad = gradient(m);
    const double f0 = developer_objective(env, delta, m);
    double t = eta;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= 0.5) {
      Vector candidate = project_cost_feasible(env, m - t * grad);
      if (developer_objective(env, delta, candidate) <= f0 + kArmijoSlope * grad.dot(candidate - m)) {
        m = std::move(candidate);
        break;
      }
    }
  }
  const double pg_norm = (m - project_cost_feasible(env, m - gradient(m))).norm();
  BestResponse out = finish(env, delta, std::move(m), 0.0);
  out.iterations = steps;
  out.converged = pg_norm <= 1e-6;
  out.kkt_residual = pg_norm;
  return out;
}

BestResponse solve_br(const Environment& env, const AuditPolicy& policy, int steps, double eta) {
  return solve_br_detectability(env, effective_detectability(env, policy), steps, eta);
}

Vector budget_exhausting_mitigation(const Environment& env, const Vector& direction) {
  check_shapes(env, direction, "budget_exhausting_mitigation");
  if ((direction.array() < 0.0).any() || !(direction.maxCoeff() > 0.0)) {
    throw ContractError("budget_exhausting_mitigation: direction must be non-negative and non-zero");
  }
  const double budget = env.budget;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 2000 && total_cost(env, hi * direction) < budget; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < kMaxBisection; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (total_cost(env, mid * direction) < budget ? lo : hi) = mid;
  }
  const double c_lo = total_cost(env, lo * direction);
  const double c_hi = total_cost(env, hi * direction);
  return (std::abs(c_lo - budget) <= std::abs(c_hi - budget) ? lo : hi) * direction;
}

Vector solve_ns(const Environment& env) {
  if (!(env.budget > 0.0)) throw ContractError("solve_ns: budget must be positive");
  return budget_exhausting_mitigation(env, env.w.cwiseProduct(env.h));
}

BestResponse best_response_detectability(const Environment& env, const Vector& delta,
                                         const DeveloperType& type, const FsOptions& fs_opts) {
  if (const auto* fs = std::get_if<developer::FullyStrategic>(&type)) {
    FsOptions opts = fs_opts;
    opts.tol = fs->tol;
    return solve_fs_detectability(env, delta, opts);
  }
  if (const auto* br = std::get_if<developer::BoundedlyRational>(&type)) {
    return solve_br_detectability(env, delta, br->steps, br->eta);
  }
  check_shapes(env, delta, "best_response");
  BestResponse out = finish(env, delta, solve_ns(env), 0.0);
  out.converged = true;
  return out;
}

BestResponse best_response(const Environment& env, const AuditPolicy& policy,
                           const DeveloperType& type, const FsOptions& fs_opts) {
  return best_response_detectability(env, effective_detectability(env, policy), type, fs_opts);
}

}  // namespace spad
