#include "spad/model.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spad {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kDerivativeStep = 1e-6;

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

double gaussian_raw(const detect::GaussianReduced& g, double eps) {
  const double z = normal_quantile(1.0 - g.level);
  return normal_cdf(eps * g.h_ref / gaussian_sigma_at_unit_eps(g) - z);
}

double rr_raw(const detect::RandomizedResponseReduced& r, double eps) {
  const double z = normal_quantile(1.0 - r.level);
  return normal_cdf(std::sqrt(r.n) * r.h_ref * std::tanh(0.5 * eps) - z);
}

// Rescaled alpha without the derivative.
double alpha_value(const DetectabilitySpec& spec, double eps) {
  return std::visit(
      overloaded{
          [&](const detect::Exponential& e) { return -std::expm1(-e.kappa * eps); },
          [&](const detect::GaussianReduced& g) {
            return (gaussian_raw(g, eps) - g.level) / (1.0 - g.level);
          },
          [&](const detect::LaplaceReduced& l) {
            // 2 * (1 - exp(-x) / 2) - 1
            return -std::expm1(-eps * (l.h_ref - l.c_null) / l.sensitivity);
          },
          [&](const detect::RandomizedResponseReduced& r) {
            // Normalised by the eps -> infinity limit of the raw power so the
            // curve saturates at exactly one.
            const double top = normal_cdf(std::sqrt(r.n) * r.h_ref - normal_quantile(1.0 - r.level));
            return (rr_raw(r, eps) - r.level) / (top - r.level);
          },
      },
      spec);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!in_open_unit(p)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double gaussian_sigma_at_unit_eps(const detect::GaussianReduced& g) {
  return g.sensitivity * std::sqrt(2.0 * std::log(1.25 / g.delta_dp));
}

std::string family_name(const DetectabilitySpec& spec) {
  return std::visit(overloaded{
                        [](const detect::Exponential&) { return std::string("exponential"); },
                        [](const detect::GaussianReduced&) { return std::string("gaussian"); },
                        [](const detect::LaplaceReduced&) { return std::string("laplace"); },
                        [](const detect::RandomizedResponseReduced&) {
                          return std::string("randomized_response");
                        },
                    },
                    spec);
}

void validate(const DetectabilitySpec& spec) {
  std::visit(overloaded{
                 [](const detect::Exponential& e) {
                   require(e.kappa > 0.0 && std::isfinite(e.kappa), "exponential: kappa must be positive");
                 },
                 [](const detect::GaussianReduced& g) {
                   require(g.sensitivity > 0.0, "gaussian: sensitivity must be positive");
                   require(in_open_unit(g.delta_dp), "gaussian: delta must lie in (0, 1)");
                   require(in_open_unit(g.level), "gaussian: test level must lie in (0, 1)");
                   require(g.h_ref > 0.0, "gaussian: reference harm must be positive");
                 },
                 [](const detect::LaplaceReduced& l) {
                   require(l.sensitivity > 0.0, "laplace: sensitivity must be positive");
                   require(l.c_null < l.h_ref, "laplace: null threshold must lie below h_ref");
                 },
                 [](const detect::RandomizedResponseReduced& r) {
                   require(r.n >= 1.0, "randomized response: n must be at least 1");
                   require(in_open_unit(r.level), "randomized response: level must lie in (0, 1)");
                   require(r.h_ref > 0.0, "randomized response: reference harm must be positive");
                 },
             },
             spec);
}

void validate(const HarmResponseSpec& spec) {
  std::visit(overloaded{
                 [](const harm::ExponentialDecay& e) {
                   require(e.beta > 0.0, "exponential decay: beta must be positive");
                 },
                 [](const harm::LinearClamp& l) {
                   require(l.gamma > 0.0, "linear clamp: gamma must be positive");
                 },
             },
             spec);
}

void validate(const CostSpec& spec) {
  require(spec.p >= 1.0 && std::isfinite(spec.p), "power-law cost: exponent must be >= 1");
}

Detectability eval_detectability(const DetectabilitySpec& spec, double eps) {
  if (!(eps >= 0.0)) throw DomainError("eval_detectability: eps must be non-negative");
  if (const auto* e = std::get_if<detect::Exponential>(&spec)) {
    const double tail = std::exp(-e->kappa * eps);
    return {-std::expm1(-e->kappa * eps), e->kappa * tail};
  }
  const double a = alpha_value(spec, eps);
  double slope;
  if (eps >= kDerivativeStep) {
    slope = (alpha_value(spec, eps + kDerivativeStep) - alpha_value(spec, eps - kDerivativeStep)) /
            (2.0 * kDerivativeStep);
  } else {
    slope = (alpha_value(spec, eps + kDerivativeStep) - a) / kDerivativeStep;
  }
  return {std::clamp(a, 0.0, 1.0), std::max(slope, 0.0)};
}

ResidualHarm eval_residual_harm(const HarmResponseSpec& spec, double h, double m) {
  return std::visit(overloaded{
                        [&](const harm::ExponentialDecay& e) {
                          const double g = h * std::exp(-e.beta * m);
                          return ResidualHarm{g, -e.beta * g, e.beta * e.beta * g};
                        },
                        [&](const harm::LinearClamp& l) {
                          // Right derivative at the kink m = h / gamma.
                          if (h - l.gamma * m > 0.0) return ResidualHarm{h - l.gamma * m, -l.gamma, 0.0};
                          return ResidualHarm{0.0, 0.0, 0.0};
                        },
                    },
                    spec);
}

Cost eval_cost(const CostSpec& spec, double m) {
  const double p = spec.p;
  if (m <= 0.0) {
    const double c1 = p == 1.0 ? 1.0 : 0.0;
    double c2 = 0.0;
    if (p < 2.0 && p > 1.0) c2 = kCostCurvatureCap;
    if (p == 2.0) c2 = 1.0;
    return {0.0, c1, c2};
  }
  const double c1 = std::pow(m, p - 1.0);
  return {c1 * m / p, c1, (p - 1.0) * std::pow(m, p - 2.0)};
}

double cost_slope_inverse(const CostSpec& spec, double slope) {
  if (!spec.strictly_convex()) throw DomainError("cost_slope_inverse: linear cost has constant slope");
  if (slope <= 0.0) return 0.0;
  return std::pow(slope, 1.0 / (spec.p - 1.0));
}

double detectability_inverse(const DetectabilitySpec& spec, double y) {
  if (!(y >= 0.0 && y < 1.0)) throw DomainError("detectability_inverse: target must lie in [0, 1)");
  if (y == 0.0) return 0.0;
  if (const auto* e = std::get_if<detect::Exponential>(&spec)) return -std::log1p(-y) / e->kappa;
  if (const auto* l = std::get_if<detect::LaplaceReduced>(&spec)) {
    return -std::log1p(-y) * l->sensitivity / (l->h_ref - l->c_null);
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && alpha_value(spec, hi) < y; ++i) hi *= 2.0;
  if (alpha_value(spec, hi) < y) throw DomainError("detectability_inverse: target not reachable");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (alpha_value(spec, mid) < y ? lo : hi) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------

void Environment::validate() const {
  const auto d = static_cast<std::size_t>(dim());
  if (d < 1) throw ContractError("environment: dimension must be at least 1");
  if (static_cast<std::size_t>(w.size()) != d || det.size() != d || harm_resp.size() != d ||
      cost.size() != d) {
    std::ostringstream os;
    os << "environment: dimension mismatch (h " << h.size() << ", w " << w.size() << ", det "
       << det.size() << ", harm_resp " << harm_resp.size() << ", cost " << cost.size() << ")";
    throw ContractError(os.str());
  }
  if ((h.array() <= 0.0).any() || !h.allFinite()) throw ContractError("environment: h must be positive");
  if ((w.array() <= 0.0).any() || !w.allFinite()) throw ContractError("environment: w must be positive");
  if (!(budget > 0.0)) throw ContractError("environment: budget must be positive");
  if (!(eps_tot > 0.0)) throw ContractError("environment: eps_tot must be positive");
  try {
    for (const auto& s : det) spad::validate(s);
    for (const auto& s : harm_resp) spad::validate(s);
    for (const auto& s : cost) spad::validate(s);
  } catch (const DomainError& e) {
    throw ContractError(std::string("environment: ") + e.what());
  }
}

Environment make_exponential_environment(const Vector& h, const Vector& w, const Vector& kappa,
                                         double budget, double eps_tot, double p, double beta) {
  Environment env;
  env.h = h;
  env.w = w;
  env.budget = budget;
  env.eps_tot = eps_tot;
  for (Eigen::Index j = 0; j < kappa.size(); ++j) {
    env.det.emplace_back(detect::Exponential{kappa[j]});
    env.harm_resp.emplace_back(harm::ExponentialDecay{beta});
    env.cost.push_back(PowerLawCost{p});
  }
  env.validate();
  return env;
}

Environment worked_example_environment() {
  return make_exponential_environment(Vector::Ones(3), Vector{{3.0, 1.0, 1.0}}, Vector::Ones(3),
                                      1.5, 3.0);
}

AuditPolicy AuditPolicy::create(Vector pi, Vector eps) {
  if (pi.size() != eps.size() || pi.size() == 0) {
    throw ContractError("audit policy: pi and eps must be non-empty and of equal length");
  }
  if (!pi.allFinite() || !eps.allFinite()) throw ContractError("audit policy: non-finite entry");
  if ((pi.array() < -1e-12).any() || (eps.array() < -1e-12).any()) {
    throw ContractError("audit policy: negative entry");
  }
  pi = pi.cwiseMax(0.0);
  eps = eps.cwiseMax(0.0);
  if (std::abs(pi.sum() - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(17);
    os << "audit policy: pi sums to " << pi.sum() << ", not 1";
    throw ContractError(os.str());
  }
  AuditPolicy p;
  p.pi_ = std::move(pi);
  p.eps_ = std::move(eps);
  return p;
}

AuditPolicy AuditPolicy::full_detectability_reference(int d, double eps_tot) {
  AuditPolicy p = create(Vector::Constant(d, 1.0 / d), Vector::Constant(d, eps_tot / d));
  p.full_detectability_ = true;
  return p;
}

void check_feasible(const Environment& env, const AuditPolicy& policy) {
  if (policy.dim() != env.dim()) throw ContractError("policy dimension does not match environment");
  if (!policy.full_detectability() && policy.eps().sum() > env.eps_tot + 1e-9) {
    throw ContractError("policy exceeds the total privacy budget");
  }
}

Vector effective_detectability(const Environment& env, const AuditPolicy& policy) {
  check_feasible(env, policy);
  if (policy.full_detectability()) return policy.pi();
  Vector delta(env.dim());
  for (int j = 0; j < env.dim(); ++j) {
    delta[j] = policy.pi()[j] * eval_detectability(env.det[j], policy.eps()[j]).alpha;
  }
  return delta;
}

AuditMetrics compute_metrics_for_detectability(const Environment& env, const Vector& delta,
                                               const Vector& m) {
  if (delta.size() != env.dim() || m.size() != env.dim()) {
    throw ContractError("compute_metrics: dimension mismatch");
  }
  AuditMetrics out;
  out.delta = delta;
  for (int j = 0; j < env.dim(); ++j) {
    const double g = eval_residual_harm(env.harm_resp[j], env.h[j], m[j]).g;
    out.dh += delta[j] * g;
    out.trh += env.w[j] * g;
    out.bw += env.w[j] * (1.0 - delta[j]) * g;
  }
  return out;
}

AuditMetrics compute_metrics(const Environment& env, const AuditPolicy& policy, const Vector& m) {
  if (m.size() != env.dim()) throw ContractError("compute_metrics: dimension mismatch");
  if ((m.array() < 0.0).any()) throw ContractError("compute_metrics: negative mitigation");
  return compute_metrics_for_detectability(env, effective_detectability(env, policy), m);
}

// ---------------------------------------------------------------------------

Calibration calibrate_mechanism(const DetectabilitySpec& mechanism) {
  if (std::holds_alternative<detect::Exponential>(mechanism)) {
    throw ContractError("calibrate_mechanism: expects a reduced-form mechanism");
  }
  validate(mechanism);
  Calibration out{mechanism, 0.0};
  if (const auto* g = std::get_if<detect::GaussianReduced>(&mechanism)) {
    out.kappa_fit = g->h_ref / gaussian_sigma_at_unit_eps(*g);
    return out;
  }
  constexpr int kGrid = 50;
  std::vector<double> eps(kGrid), target(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    eps[i] = 0.01 + (10.0 - 0.01) * i / (kGrid - 1);
    target[i] = alpha_value(mechanism, eps[i]);
  }
  auto sse = [&](double log_kappa) {
    const double kappa = std::exp(log_kappa);
    double s = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      const double r = -std::expm1(-kappa * eps[i]) - target[i];
      s += r * r;
    }
    return s;
  };
  const auto best = boost::math::tools::brent_find_minima(sse, std::log(1e-4), std::log(1e3),
                                                          std::numeric_limits<double>::digits / 2);
  out.kappa_fit = std::exp(best.first);
  return out;
}

}  // namespace spad
