#include <doctest.h>

#include "spad/model.hpp"
#include "spad/model_io.hpp"
#include "support.hpp"

#include <cmath>

using namespace spad;

TEST_CASE("exponential detectability matches the closed form") {
  const DetectabilitySpec s = detect::Exponential{1.7};
  for (double eps : {0.0, 0.1, 0.5, 2.0, 10.0}) {
    const Detectability d = eval_detectability(s, eps);
    CHECK(d.alpha == doctest::Approx(oracle::alpha(1.7, eps)).epsilon(1e-14));
    CHECK(d.alpha_prime == doctest::Approx(1.7 * std::exp(-1.7 * eps)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(eval_detectability(s, -0.1), DomainError);
}

TEST_CASE("reduced-form curves start at zero, increase and stay below one") {
  const std::vector<DetectabilitySpec> specs{detect::GaussianReduced{}, detect::LaplaceReduced{},
                                             detect::RandomizedResponseReduced{}};
  for (const auto& s : specs) {
    CAPTURE(family_name(s));
    CHECK(std::abs(eval_detectability(s, 0.0).alpha) < 1e-12);
    double prev = 0.0;
    for (double eps : {0.05, 0.2, 1.0, 3.0, 8.0}) {
      const Detectability d = eval_detectability(s, eps);
      CHECK(d.alpha > prev);
      CHECK(d.alpha <= 1.0);
      CHECK(d.alpha_prime >= 0.0);
      prev = d.alpha;
    }
  }
}

TEST_CASE("detectability inverse round-trips") {
  const std::vector<DetectabilitySpec> specs{detect::Exponential{0.4}, detect::GaussianReduced{},
                                             detect::LaplaceReduced{}, detect::RandomizedResponseReduced{}};
  for (const auto& s : specs) {
    for (double y : {0.1, 0.5, 0.9}) {
      const double eps = detectability_inverse(s, y);
      CHECK(eval_detectability(s, eps).alpha == doctest::Approx(y).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(detectability_inverse(detect::Exponential{}, 1.0), DomainError);
}

TEST_CASE("residual harm and cost derivatives") {
  const ResidualHarm g = eval_residual_harm(harm::ExponentialDecay{2.0}, 1.5, 0.3);
  CHECK(g.g == doctest::Approx(1.5 * std::exp(-0.6)));
  CHECK(g.g1 == doctest::Approx(-2.0 * g.g));
  CHECK(g.g2 == doctest::Approx(4.0 * g.g));
  CHECK(eval_residual_harm(harm::LinearClamp{2.0}, 1.0, 0.75).g == 0.0);
  CHECK(eval_residual_harm(harm::LinearClamp{2.0}, 1.0, 0.25).g == doctest::Approx(0.5));

  const Cost c = eval_cost(PowerLawCost{3.0}, 2.0);
  CHECK(c.c == doctest::Approx(8.0 / 3.0));
  CHECK(c.c1 == doctest::Approx(4.0));
  CHECK(c.c2 == doctest::Approx(4.0));
  CHECK(eval_cost(PowerLawCost{1.5}, 0.0).c2 == kCostCurvatureCap);
  CHECK(cost_slope_inverse(PowerLawCost{3.0}, 4.0) == doctest::Approx(2.0));
}

TEST_CASE("policy construction enforces the simplex") {
  CHECK_NOTHROW(AuditPolicy::create(Vector{{0.5, 0.5}}, Vector{{1.0, 1.0}}));
  CHECK_THROWS_AS(AuditPolicy::create(Vector{{0.6, 0.5}}, Vector{{1.0, 1.0}}), ContractError);
  CHECK_THROWS_AS(AuditPolicy::create(Vector{{1.1, -0.1}}, Vector{{1.0, 1.0}}), ContractError);
  const AuditPolicy tiny = AuditPolicy::create(Vector{{1.0, -1e-13}}, Vector{{1.0, 0.0}});
  CHECK(tiny.pi()[1] == 0.0);

  const Environment env = worked_example_environment();
  CHECK_THROWS_AS(check_feasible(env, AuditPolicy::create(Vector::Constant(3, 1.0 / 3), Vector::Constant(3, 1.01))),
                  ContractError);
}

TEST_CASE("metrics agree with the oracle at an arbitrary mitigation") {
  const oracle::Game g{{1.0, 2.0, 0.5}, {3.0, 1.0, 0.5}, {1.0, 0.5, 2.0}, 2.0, 1.5};
  const Environment env = support::environment(g, 3.0);
  const oracle::Vec pi{0.2, 0.5, 0.3}, eps{1.0, 1.5, 0.5}, m{0.3, 0.1, 0.8};
  const AuditMetrics got = compute_metrics(env, AuditPolicy::create(support::to_eigen(pi), support::to_eigen(eps)),
                                           support::to_eigen(m));
  const oracle::Metrics want = oracle::metrics(g, oracle::delta(g, pi, eps), m);
  CHECK(got.dh == doctest::Approx(want.dh).epsilon(1e-14));
  CHECK(got.trh == doctest::Approx(want.trh).epsilon(1e-14));
  CHECK(got.bw == doctest::Approx(want.bw).epsilon(1e-14));
}

TEST_CASE("full-detectability reference sets every alpha to one") {
  const Environment env = worked_example_environment();
  const AuditPolicy orc = AuditPolicy::full_detectability_reference(3, env.eps_tot);
  const AuditMetrics m = compute_metrics(env, orc, Vector::Constant(3, 0.2));
  // delta = pi, uniform.
  CHECK((m.delta.array() == orc.pi().array()).all());
  CHECK(m.dh == doctest::Approx(m.trh / 5.0));  // sum g = trh / 5 for w = (3,1,1)
  CHECK(m.bw == doctest::Approx(m.trh * 2.0 / 3.0));
}

TEST_CASE("environment validation") {
  Environment env = worked_example_environment();
  CHECK_NOTHROW(env.validate());
  env.w[1] = 0.0;
  CHECK_THROWS_AS(env.validate(), ContractError);
  env = worked_example_environment();
  env.det.pop_back();
  CHECK_THROWS_AS(env.validate(), ContractError);
}

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("calibration fits a positive rate and rejects the exponential family") {
  const Calibration c = calibrate_mechanism(detect::GaussianReduced{});
  CHECK(c.kappa_fit > 0.0);
  CHECK_THROWS_AS(calibrate_mechanism(detect::Exponential{}), ContractError);
  CHECK_THROWS_AS(calibrate_mechanism(detect::LaplaceReduced{1.0, 2.0, 1.0}), DomainError);
  CHECK(gaussian_sigma_at_unit_eps(detect::GaussianReduced{2.0, 1e-5, 0.05, 1.0}) ==
        doctest::Approx(2.0 * std::sqrt(2.0 * std::log(1.25e5))));
}

TEST_CASE("environment and policy JSON round-trip") {
  Environment env = worked_example_environment();
  env.det[1] = detect::RandomizedResponseReduced{50.0, 0.1, 0.8};
  env.harm_resp[2] = harm::LinearClamp{0.7};
  const Environment back = environment_from_json(Json::parse(to_json(env).dump()));
  CHECK(back.dim() == 3);
  CHECK(back.h == env.h);
  CHECK(back.w == env.w);
  CHECK(back.budget == env.budget);
  CHECK(family_name(back.det[1]) == "randomized_response");
  CHECK(std::get<harm::LinearClamp>(back.harm_resp[2]).gamma == 0.7);

  const AuditPolicy p = AuditPolicy::create(Vector{{0.1, 0.2, 0.7}}, Vector{{0.3, 1.0 / 3.0, 2.0}});
  const AuditPolicy q = policy_from_json(Json::parse(to_json(p).dump()));
  CHECK(q.pi() == p.pi());
  CHECK(q.eps() == p.eps());

  Json bad = to_json(env);
  bad["det"][0]["family"] = "nope";
  CHECK_THROWS(environment_from_json(bad));
}
