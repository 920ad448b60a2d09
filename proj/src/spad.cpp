#include "spad/design.hpp"
#include "spad/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace spad {

namespace {

struct RestartOutcome {
  bool ok = false;
  AuditPolicy best;
  double best_bw = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRecord> records;
};

AuditPolicy random_start(const Environment& env, std::uint64_t seed, int restart) {
  Rng rng(mix_seed({seed, static_cast<std::uint64_t>(restart)}));
  const int d = env.dim();
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector pi(d), eps(d);
  for (int j = 0; j < d; ++j) pi[j] = gamma(rng);
  for (int j = 0; j < d; ++j) eps[j] = unit(rng);
  pi /= pi.sum();
  eps *= env.eps_tot / eps.sum();
  return project_policy(pi, eps, env.eps_tot);
}

Hypergradient gradient_for(const Environment& env, const AuditPolicy& x, const SpadOptions& opts,
                           const FsOptions& fs_opts) {
  if (std::holds_alternative<developer::FullyStrategic>(opts.target)) {
    return hypergradient(env, x, opts.hypergrad_mode, fs_opts);
  }
  double step = hypergrad::FiniteDifference{}.step;
  if (const auto* fd = std::get_if<hypergrad::FiniteDifference>(&opts.hypergrad_mode)) step = fd->step;
  return finite_difference_hypergradient(env, x, opts.target, step, fs_opts);
}

RestartOutcome run_restart(const Environment& env, const SpadOptions& opts, AuditPolicy x, int restart,
                           double eta0) {
  RestartOutcome out;
  FsOptions fs_opts;
  if (const auto* fs = std::get_if<developer::FullyStrategic>(&opts.target)) fs_opts.tol = fs->tol;
  try {
    for (int t = 0; t < opts.t_max; ++t) {
      const Hypergradient hg = gradient_for(env, x, opts, fs_opts);
      // Warm-start the next inner solve from this iterate's multiplier.
      fs_opts.lambda_hint.reset();
      if (hg.response.lambda > 0.0) fs_opts.lambda_hint = hg.response.lambda;

      const double eta = eta0 * std::pow(opts.decay, t / opts.decay_every);
      AuditPolicy next = project_policy(x.pi() - eta * hg.grad_pi, x.eps() - eta * hg.grad_eps, env.eps_tot);
      const double grad_norm =
          std::sqrt((x.pi() - next.pi()).squaredNorm() + (x.eps() - next.eps()).squaredNorm()) / eta;
      out.records.push_back({restart, t, hg.bw, grad_norm, eta, x.pi(), x.eps()});
      if (hg.bw < out.best_bw) {
        out.best_bw = hg.bw;
        out.best = x;
      }
      out.iterations = t + 1;
      if (grad_norm <= opts.tol) {
        out.converged = true;
        break;
      }
      x = std::move(next);
    }
    out.ok = true;
  } catch (const SolverError&) {
    out.ok = false;
  }
  return out;
}

void check_options(const SpadOptions& opts) {
  if (opts.eta0 && !(*opts.eta0 > 0.0)) throw ContractError("spad: eta0 must be positive");
  if (!(opts.decay > 0.0 && opts.decay <= 1.0)) throw ContractError("spad: decay must lie in (0, 1]");
  if (opts.decay_every < 1) throw ContractError("spad: decay interval must be positive");
  if (opts.restarts < 1) throw ContractError("spad: need at least one restart");
  if (opts.t_max < 1) throw ContractError("spad: t_max must be positive");
}

}  // namespace

SpadResult spad(const Environment& env, const SpadOptions& opts) {
  env.validate();
  check_options(opts);
  const double eta0 = opts.eta0.value_or(0.1 * env.eps_tot);

  std::vector<AuditPolicy> starts;
  starts.push_back(opts.initial ? *opts.initial : baseline_policy(baseline::Uniform{}, env));
  for (int r = 1; r < opts.restarts; ++r) starts.push_back(random_start(env, opts.rng_seed, r));
  for (const auto& p : opts.extra_starts) {
    check_feasible(env, p);
    starts.push_back(p);
  }

  SpadResult result;
  bool any = false;
  for (int r = 0; r < static_cast<int>(starts.size()); ++r) {
    RestartOutcome o = run_restart(env, opts, starts[r], r, eta0);
    result.trace.records.insert(result.trace.records.end(), o.records.begin(), o.records.end());
    result.trace.restart_bw.push_back(o.ok ? o.best_bw : std::numeric_limits<double>::quiet_NaN());
    if (o.ok && (!any || o.best_bw < result.bw)) {
      any = true;
      result.bw = o.best_bw;
      result.policy = o.best;
      result.iterations = o.iterations;
      result.converged = o.converged;
      result.trace.selected_restart = r;
    }
  }
  if (!any) throw SolverError("spad: every restart failed in the inner solver");
  return result;
}

std::string trace_csv(const OptimTrace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,restart,B_w,grad_norm,step\n";
  for (const auto& r : trace.records) {
    os << r.iteration << ',' << r.restart << ',' << r.bw << ',' << r.grad_norm << ',' << r.step << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> evaluate_types(const Environment& env, const AuditPolicy& policy,
                                   const std::vector<WeightedType>& types) {
  std::vector<double> out;
  out.reserve(types.size());
  for (const auto& t : types) out.push_back(gap_at(env, policy.pi(), policy.eps(), t.type));
  return out;
}

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

RobustResult make_result(const Environment& env, const std::vector<WeightedType>& types, SpadResult inner) {
  RobustResult r;
  r.type_bw = evaluate_types(env, inner.policy, types);
  r.worst_bw = r.type_bw[argmax(r.type_bw)];
  double wsum = 0.0;
  for (std::size_t i = 0; i < types.size(); ++i) {
    r.weighted_bw += types[i].weight * r.type_bw[i];
    wsum += types[i].weight;
  }
  if (wsum > 0.0) r.weighted_bw /= wsum;
  r.policy = inner.policy;
  r.inner = std::move(inner);
  return r;
}

}  // namespace

RobustResult robust_spad(const Environment& env, const std::vector<WeightedType>& types,
                         const SpadOptions& opts) {
  if (types.empty()) throw ContractError("robust_spad: type set must be non-empty");
  for (const auto& t : types) {
    if (!(t.weight >= 0.0)) throw ContractError("robust_spad: weights must be non-negative");
  }
  constexpr int kMaxRounds = 20;
  constexpr int kStableRounds = 3;

  auto run_against = [&](const DeveloperType& type, SpadOptions o) {
    o.target = type;
    return spad(env, o);
  };

  if (types.size() == 1) {
    RobustResult r = make_result(env, types, run_against(types[0].type, opts));
    r.worst_type_history.push_back(0);
    return r;
  }

  // Round 0: a designer run against each pure type; keep the best worst case.
  RobustResult best;
  bool have = false;
  for (const auto& t : types) {
    RobustResult cand = make_result(env, types, run_against(t.type, opts));
    if (!have || cand.worst_bw < best.worst_bw) {
      best = std::move(cand);
      have = true;
    }
  }

  AuditPolicy current = best.policy;
  int worst = argmax(best.type_bw);
  best.worst_type_history.push_back(worst);
  int stable = 0;
  int rounds = 0;
  while (rounds < kMaxRounds && stable < kStableRounds) {
    ++rounds;
    SpadOptions o = opts;
    o.restarts = 1;
    o.initial = current;
    o.extra_starts.clear();
    RobustResult cand = make_result(env, types, run_against(types[worst].type, o));
    current = cand.policy;
    const int next_worst = argmax(cand.type_bw);
    stable = next_worst == worst ? stable + 1 : 0;
    worst = next_worst;
    std::vector<int> history = std::move(best.worst_type_history);
    history.push_back(worst);
    if (cand.worst_bw < best.worst_bw) best = std::move(cand);
    best.worst_type_history = std::move(history);
  }
  best.rounds = rounds;
  return best;
}

}  // namespace spad
