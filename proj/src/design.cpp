#include "spad/design.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>

namespace spad {

namespace {

constexpr double kBoundaryTol = 1e-8;

struct DetectabilityTerms {
  Vector alpha;
  Vector alpha_prime;
};

DetectabilityTerms detectability_terms(const Environment& env, const Vector& eps) {
  DetectabilityTerms out{Vector(env.dim()), Vector(env.dim())};
  for (int j = 0; j < env.dim(); ++j) {
    const Detectability a = eval_detectability(env.det[j], eps[j]);
    out.alpha[j] = a.alpha;
    out.alpha_prime[j] = a.alpha_prime;
  }
  return out;
}

Vector delta_at(const Environment& env, const Vector& pi, const Vector& eps) {
  Vector delta(env.dim());
  for (int j = 0; j < env.dim(); ++j) delta[j] = pi[j] * eval_detectability(env.det[j], eps[j]).alpha;
  return delta;
}

}  // namespace

std::string label(const BaselineKind& kind) {
  switch (kind.index()) {
    case 0: return "UNIF";
    case 1: return "HP";
    case 2: return "WP";
    case 3: return "UF";
    default: return "ORC";
  }
}

AuditPolicy proportional_policy(const Vector& weights, double eps_tot) {
  if (weights.size() == 0 || (weights.array() < 0.0).any() || !(weights.maxCoeff() > 0.0)) {
    throw ContractError("proportional_policy: weights must be non-negative and not all zero");
  }
  // Dividing by the maximum first makes equal weights map to exactly 1/d.
  const Vector r = weights / weights.maxCoeff();
  const double total = r.sum();
  Vector pi(r.size()), eps(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    pi[j] = r[j] / total;
    eps[j] = eps_tot * r[j] / total;
  }
  return AuditPolicy::create(std::move(pi), std::move(eps));
}

AuditPolicy baseline_policy(const BaselineKind& kind, const Environment& env) {
  const int d = env.dim();
  switch (kind.index()) {
    case 0: return proportional_policy(Vector::Ones(d), env.eps_tot);
    case 1: return proportional_policy(env.h, env.eps_tot);
    case 2: return proportional_policy(env.w, env.eps_tot);
    case 3: {
      const Vector& s = std::get<baseline::UncertaintyFocused>(kind).h_std;
      if (s.size() != d) throw ContractError("UF baseline needs an h_std vector of length d");
      return proportional_policy(s, env.eps_tot);
    }
    default: return AuditPolicy::full_detectability_reference(d, env.eps_tot);
  }
}

Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw ContractError("project_simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

AuditPolicy project_policy(const Vector& pi_raw, const Vector& eps_raw, double eps_tot) {
  if (pi_raw.size() != eps_raw.size()) throw ContractError("project_policy: length mismatch");
  Vector pi = project_simplex(pi_raw);
  Vector eps = eps_raw.cwiseMax(0.0);
  const double total = eps.sum();
  if (total > eps_tot) eps *= eps_tot / total;
  // Re-normalise away rounding so the simplex invariant holds to 1e-15.
  pi /= pi.sum();
  return AuditPolicy::create(std::move(pi), std::move(eps));
}

// ---------------------------------------------------------------------------

double gap_at(const Environment& env, const Vector& pi, const Vector& eps, const DeveloperType& type,
              const FsOptions& fs_opts) {
  const Vector delta = delta_at(env, pi, eps);
  const BestResponse r = best_response_detectability(env, delta, type, fs_opts);
  return compute_metrics_for_detectability(env, delta, r.m).bw;
}

Hypergradient finite_difference_hypergradient(const Environment& env, const AuditPolicy& policy,
                                              const DeveloperType& type, double step,
                                              const FsOptions& fs_opts) {
  if (policy.full_detectability()) throw ContractError("hypergradient: reference policy has no gradient");
  check_feasible(env, policy);
  if (!(step > 0.0)) throw ContractError("hypergradient: step must be positive");
  const int d = env.dim();
  const Vector& pi = policy.pi();
  const Vector& eps = policy.eps();

  Hypergradient out;
  const Vector delta = delta_at(env, pi, eps);
  out.response = best_response_detectability(env, delta, type, fs_opts);
  out.bw = compute_metrics_for_detectability(env, delta, out.response.m).bw;
  out.used_finite_difference = true;
  out.grad_pi.resize(d);
  out.grad_eps.resize(d);
  for (int j = 0; j < d; ++j) {
    Vector p = pi;
    p[j] += step;
    out.grad_pi[j] = (gap_at(env, p, eps, type, fs_opts) - out.bw) / step;
    Vector e = eps;
    e[j] += step;
    out.grad_eps[j] = (gap_at(env, pi, e, type, fs_opts) - out.bw) / step;
  }
  return out;
}

Hypergradient hypergradient(const Environment& env, const AuditPolicy& policy,
                            const HypergradMode& mode, const FsOptions& fs_opts) {
  if (const auto* fd = std::get_if<hypergrad::FiniteDifference>(&mode)) {
    return finite_difference_hypergradient(env, policy, developer::FullyStrategic{fs_opts.tol},
                                           fd->step, fs_opts);
  }
  if (policy.full_detectability()) throw ContractError("hypergradient: reference policy has no gradient");
  const int d = env.dim();
  const DetectabilityTerms terms = detectability_terms(env, policy.eps());
  const Vector delta = policy.pi().cwiseProduct(terms.alpha);
  check_feasible(env, policy);
  BestResponse resp = solve_fs_detectability(env, delta, fs_opts);

  if (resp.m.minCoeff() < kBoundaryTol) {
    // Active-set boundary: the implicit-function argument does not apply.
    Hypergradient out = finite_difference_hypergradient(
        env, policy, developer::FullyStrategic{fs_opts.tol}, hypergrad::FiniteDifference{}.step, fs_opts);
    out.fell_back = true;
    return out;
  }

  Vector g(d), g1(d), g2(d), c1(d), c2(d);
  for (int j = 0; j < d; ++j) {
    const ResidualHarm r = eval_residual_harm(env.harm_resp[j], env.h[j], resp.m[j]);
    const Cost c = eval_cost(env.cost[j], resp.m[j]);
    g[j] = r.g;
    g1[j] = r.g1;
    g2[j] = r.g2;
    c1[j] = c.c1;
    c2[j] = c.c2;
  }
  const double lambda = resp.lambda;
  const Vector curvature = (1.0 + lambda) * c2 + delta.cwiseProduct(g2);  // D_j
  const Vector dbw_dm = env.w.cwiseProduct((1.0 - delta.array()).matrix()).cwiseProduct(g1);
  const Vector direct = -env.w.cwiseProduct(g);

  // dB_w / d delta_j through the best response.
  Vector dbw_ddelta(d);
  if (lambda == 0.0) {
    for (int j = 0; j < d; ++j) dbw_ddelta[j] = direct[j] + dbw_dm[j] * (-g1[j] / curvature[j]);
  } else {
    // Bordered KKT Jacobian in (m, lambda); adjoint solve J^T y = (dB/dm, 0).
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d + 1, d + 1);
    jac.topLeftCorner(d, d).diagonal() = curvature;
    jac.topRightCorner(d, 1) = c1;
    jac.bottomLeftCorner(1, d) = c1.transpose();
    Vector rhs = Vector::Zero(d + 1);
    rhs.head(d) = dbw_dm;
    const Vector adjoint = jac.transpose().partialPivLu().solve(rhs);
    for (int j = 0; j < d; ++j) dbw_ddelta[j] = direct[j] - adjoint[j] * g1[j];
  }

  Hypergradient out;
  out.grad_pi = terms.alpha.cwiseProduct(dbw_ddelta);
  out.grad_eps = policy.pi().cwiseProduct(terms.alpha_prime).cwiseProduct(dbw_ddelta);
  out.bw = compute_metrics_for_detectability(env, delta, resp.m).bw;
  out.response = std::move(resp);
  return out;
}

}  // namespace spad
