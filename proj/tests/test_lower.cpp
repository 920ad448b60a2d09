#include <doctest.h>

#include "spad/lower.hpp"
#include "support.hpp"

#include <cmath>

using namespace spad;

namespace {

AuditPolicy policy_of(const support::Draw& d) {
  return AuditPolicy::create(support::to_eigen(d.pi), support::to_eigen(d.eps));
}

}  // namespace

TEST_CASE("exact response matches nested bisection in both budget regimes") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 60; ++i) {
    const std::size_t d = 2 + i % 5;
    const double budget = i % 2 == 0 ? 20.0 : 0.05;
    support::Draw draw = support::random_draw(rng, d, budget);
    draw.game.p = (i % 3 == 0) ? 1.5 : (i % 3 == 1 ? 2.0 : 3.0);
    const Environment env = support::environment(draw.game, draw.eps_tot);
    const BestResponse got = solve_fs(env, policy_of(draw));
    const oracle::Response want = oracle::best_response(draw.game, oracle::delta(draw.game, draw.pi, draw.eps));
    CAPTURE(i);
    CHECK(got.converged);
    for (std::size_t j = 0; j < d; ++j) CHECK(got.m[j] == doctest::Approx(want.m[j]).epsilon(1e-6));
    CHECK(got.lambda == doctest::Approx(want.lambda).epsilon(1e-5).scale(1.0));
    CHECK(total_cost(env, got.m) <= budget * (1.0 + 1e-9));
  }
}

TEST_CASE("exact response beats a 200 x 200 grid on d = 2") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const support::Draw draw = support::random_draw(rng, 2, i % 2 == 0 ? 0.2 : 3.0);
    const Environment env = support::environment(draw.game, draw.eps_tot);
    const BestResponse r = solve_fs(env, policy_of(draw));
    const double grid = oracle::grid_minimum_2d(draw.game, oracle::delta(draw.game, draw.pi, draw.eps));
    CHECK(r.objective <= grid + 1e-6);
    CHECK(r.kkt_residual <= 1e-6);
    CHECK(r.lambda * (draw.game.budget - r.cost_used) <= 1e-6);
  }
}

TEST_CASE("zero detectability yields zero mitigation") {
  const oracle::Game g{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, 2.0, 1.0};
  const Environment env = support::environment(g, 1.0);
  const BestResponse r = solve_fs(env, AuditPolicy::create(Vector{{1.0, 0.0}}, Vector{{1.0, 0.0}}));
  CHECK(r.m[1] == 0.0);
  CHECK(r.m[0] > 0.0);
}

TEST_CASE("linear cost is rejected by the exact solver") {
  const oracle::Game g{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, 1.0, 1.0};
  const Environment env = support::environment(g, 1.0);
  CHECK_THROWS_AS(solve_fs(env, AuditPolicy::create(Vector{{0.5, 0.5}}, Vector{{0.5, 0.5}})), ContractError);
}

TEST_CASE("non-strategic mitigation exhausts the budget along w*h") {
  const oracle::Game g{{1.0, 2.0, 0.5}, {3.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, 3.0, 1.5};
  const Environment env = support::environment(g, 3.0);
  const Vector m = solve_ns(env);
  CHECK(total_cost(env, m) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m[0] / m[1] == doctest::Approx(1.5));
  CHECK(m[2] / m[1] == doctest::Approx(0.25));
  CHECK_THROWS_AS(budget_exhausting_mitigation(env, Vector::Zero(3)), ContractError);
}

TEST_CASE("cost-feasible projection clamps then rescales") {
  const oracle::Game g{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, 2.0, 0.5};
  const Environment env = support::environment(g, 1.0);
  const Vector inside = project_cost_feasible(env, Vector{{-0.3, 0.4}});
  CHECK(inside[0] == 0.0);
  CHECK(inside[1] == doctest::Approx(0.4));
  const Vector scaled = project_cost_feasible(env, Vector{{2.0, 2.0}});
  CHECK(total_cost(env, scaled) == doctest::Approx(0.5));
  CHECK(scaled[0] == doctest::Approx(scaled[1]));
}

TEST_CASE("bounded rationality stays feasible and approaches the exact response") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const support::Draw draw = support::random_draw(rng, 4, 1.0);
    const Environment env = support::environment(draw.game, draw.eps_tot);
    const AuditPolicy pol = policy_of(draw);
    const BestResponse exact = solve_fs(env, pol);
    const BestResponse few = solve_br(env, pol, 5, 0.05);
    const BestResponse many = solve_br(env, pol, 5000, 0.05);
    CHECK(few.cost_used <= env.budget * (1.0 + 1e-9));
    CHECK(few.objective >= exact.objective - 1e-9);
    CHECK(many.objective <= few.objective + 1e-12);
    CHECK(many.objective == doctest::Approx(exact.objective).epsilon(1e-4));
  }
  const Environment env = support::environment({{1.0}, {1.0}, {1.0}, 2.0, 1.0}, 1.0);
  CHECK_THROWS_AS(solve_br(env, AuditPolicy::create(Vector{{1.0}}, Vector{{1.0}}), -1, 0.1), ContractError);
}

TEST_CASE("dispatch by developer type") {
  const Environment env = worked_example_environment();
  const AuditPolicy pol = AuditPolicy::create(Vector::Constant(3, 1.0 / 3), Vector::Ones(3));
  CHECK(label(DeveloperType{developer::FullyStrategic{}}) == "FS");
  CHECK(label(DeveloperType{developer::BoundedlyRational{}}) == "BR");
  CHECK(label(DeveloperType{developer::NonStrategic{}}) == "NS");
  const BestResponse ns = best_response(env, pol, developer::NonStrategic{});
  CHECK((ns.m - solve_ns(env)).norm() < 1e-12);
  CHECK(ns.lambda == 0.0);
}
