#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spad {

using Vector = Eigen::VectorXd;

/// Raised when a caller violates a documented precondition (shapes, types).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for arguments outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Detectability families. Every family maps eps >= 0 to alpha in [0, 1) with
// alpha(0) = 0, strictly increasing, alpha -> 1 as eps -> infinity.

namespace detect {

/// alpha(eps) = 1 - exp(-kappa * eps)
struct Exponential {
  double kappa = 1.0;
};

/// One-sided z-test on a Gaussian-mechanism release at reference harm h_ref.
struct GaussianReduced {
  double sensitivity = 1.0;
  double delta_dp = 1e-5;
  double level = 0.05;
  double h_ref = 1.0;
};

/// Threshold test on a Laplace-mechanism release against null c_null.
struct LaplaceReduced {
  double sensitivity = 1.0;
  double c_null = 0.0;
  double h_ref = 1.0;
};

/// CLT test over n randomized-response answers.
struct RandomizedResponseReduced {
  double n = 100.0;
  double level = 0.05;
  double h_ref = 1.0;
};

}  // namespace detect

using DetectabilitySpec =
    std::variant<detect::Exponential, detect::GaussianReduced, detect::LaplaceReduced,
                 detect::RandomizedResponseReduced>;

// ---------------------------------------------------------------------------
// Residual-harm families g(h, m).

namespace harm {

/// g = h * exp(-beta * m)
struct ExponentialDecay {
  double beta = 1.0;
};

/// g = max(h - gamma * m, 0). Convex but not strictly convex.
struct LinearClamp {
  double gamma = 1.0;
};

}  // namespace harm

using HarmResponseSpec = std::variant<harm::ExponentialDecay, harm::LinearClamp>;

/// c(m) = m^p / p. p > 1 is strictly convex; p == 1 (linear) is accepted for
/// evaluation but rejected by the exact best-response solver.
struct PowerLawCost {
  double p = 2.0;

  bool strictly_convex() const { return p > 1.0; }
};

using CostSpec = PowerLawCost;

/// Curvature reported for c'' at m = 0 when p < 2.
inline constexpr double kCostCurvatureCap = 1e12;

struct Detectability {
  double alpha = 0.0;
  double alpha_prime = 0.0;
};

struct ResidualHarm {
  double g = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

struct Cost {
  double c = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

void validate(const DetectabilitySpec& spec);
void validate(const HarmResponseSpec& spec);
void validate(const CostSpec& spec);

Detectability eval_detectability(const DetectabilitySpec& spec, double eps);
ResidualHarm eval_residual_harm(const HarmResponseSpec& spec, double h, double m);
Cost eval_cost(const CostSpec& spec, double m);

/// Smallest eps with alpha(eps) >= y, for y in [0, 1).
double detectability_inverse(const DetectabilitySpec& spec, double y);

/// Inverse of c'(m) for the power law: the m with c'(m) = slope.
double cost_slope_inverse(const CostSpec& spec, double slope);

// ---------------------------------------------------------------------------

struct Environment {
  Vector h;
  Vector w;
  std::vector<DetectabilitySpec> det;
  std::vector<HarmResponseSpec> harm_resp;
  std::vector<CostSpec> cost;
  double budget = 1.0;   // developer cost budget B
  double eps_tot = 1.0;  // total privacy budget

  int dim() const { return static_cast<int>(h.size()); }

  /// Throws ContractError on shape mismatch or non-positive entries.
  void validate() const;
};

/// Environment with exponential detectability, exponential-decay harm with
/// rate beta, and power-law costs with exponent p in every dimension.
Environment make_exponential_environment(const Vector& h, const Vector& w, const Vector& kappa,
                                         double budget, double eps_tot, double p = 2.0,
                                         double beta = 1.0);

/// Three-dimension reference instance: h = (1,1,1), w = (3,1,1), eps_tot = 3,
/// kappa = beta = 1, quadratic cost, B = 1.5.
Environment worked_example_environment();

/// Auditor's committed action: query distribution on the simplex and a
/// per-dimension privacy allocation.
class AuditPolicy {
 public:
  AuditPolicy() = default;

  /// Validates |sum(pi) - 1| <= 1e-9 and entries >= -1e-12 (tiny negatives are
  /// clamped to zero). Throws ContractError otherwise.
  static AuditPolicy create(Vector pi, Vector eps);

  /// Reference policy with every alpha forced to one. Not feasible: it stands
  /// for an unlimited privacy budget and is only used for evaluation.
  static AuditPolicy full_detectability_reference(int d, double eps_tot);

  const Vector& pi() const { return pi_; }
  const Vector& eps() const { return eps_; }
  bool full_detectability() const { return full_detectability_; }
  int dim() const { return static_cast<int>(pi_.size()); }

 private:
  Vector pi_;
  Vector eps_;
  bool full_detectability_ = false;
};

/// Throws ContractError if dimensions differ or sum(eps) > eps_tot + 1e-9.
void check_feasible(const Environment& env, const AuditPolicy& policy);

/// delta_j = pi_j * alpha_j(eps_j).
Vector effective_detectability(const Environment& env, const AuditPolicy& policy);

struct AuditMetrics {
  double dh = 0.0;   // detected harm
  double trh = 0.0;  // true residual harm
  double bw = 0.0;   // welfare-weighted under-detection gap
  Vector delta;
};

AuditMetrics compute_metrics(const Environment& env, const AuditPolicy& policy, const Vector& m);

/// Same as compute_metrics with the effective detectability given directly.
AuditMetrics compute_metrics_for_detectability(const Environment& env, const Vector& delta,
                                               const Vector& m);

// ---------------------------------------------------------------------------
// Reduced-form mechanism calibration.

struct Calibration {
  DetectabilitySpec curve;  // the rescaled reduced-form alpha
  double kappa_fit = 0.0;   // rate of the exponential surrogate
};

/// Gaussian noise scale at eps = 1: sensitivity * sqrt(2 ln(1.25 / delta)).
double gaussian_sigma_at_unit_eps(const detect::GaussianReduced& g);

/// Fits the exponential surrogate. Throws ContractError for the exponential
/// family itself and DomainError for invalid mechanism parameters.
Calibration calibrate_mechanism(const DetectabilitySpec& mechanism);

/// Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double p);

std::string family_name(const DetectabilitySpec& spec);

}  // namespace spad
