#include <doctest.h>

#include "spad/bench.hpp"

#include <cmath>
#include <sstream>

using namespace spad;
using namespace spad::bench;

TEST_CASE("FNV-1a reference values") {
  CHECK(stream_hash("") == 0xcbf29ce484222325ULL);
  CHECK(stream_hash("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(stream_hash("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("sampling is deterministic and respects the configuration") {
  SamplingConfig c;
  c.d = 7;
  c.b_factor = 0.5;
  const Environment a = sample_environment(c, 3);
  const Environment b = sample_environment(c, 3);
  CHECK(a.h == b.h);
  CHECK(a.w == b.w);
  CHECK(a.h.sum() == doctest::Approx(7.0));
  CHECK(a.w.sum() == doctest::Approx(1.0));
  CHECK(a.budget == 3.5);
  CHECK(a.h != sample_environment(c, 4).h);

  SamplingConfig other = c;
  other.stream = "elsewhere";
  CHECK(a.h != sample_environment(other, 3).h);

  for (const auto& det : a.det) {
    const double k = std::get<detect::Exponential>(det).kappa;
    CHECK(k >= 0.1);
    CHECK(k <= 2.0);
  }

  c.welfare = WelfareMode::Uniform;
  c.kappa = KappaMode::Homogeneous;
  const Environment u = sample_environment(c, 3);
  CHECK((u.w.array() == 1.0 / 7).all());
  for (const auto& det : u.det) CHECK(std::get<detect::Exponential>(det).kappa == 1.0);

  c.d = 0;
  CHECK_THROWS_AS(sample_environment(c, 0), ContractError);
}

TEST_CASE("sparse harms are skewed, dense harms are bounded") {
  SamplingConfig c;
  c.d = 2000;
  Rng rng(1);
  const Vector dense = sample_raw_harm(c, rng);
  CHECK(dense.minCoeff() >= 0.5);
  CHECK(dense.maxCoeff() <= 1.5);
  c.harm = HarmMode::Sparse;
  const Vector sparse = sample_raw_harm(c, rng);
  CHECK(sparse.mean() == doctest::Approx(0.2).epsilon(0.1));  // Beta(0.5, 2) mean
  CHECK(sparse.minCoeff() > 0.0);
  const Vector sd = harm_prior_std(SamplingConfig{});
  CHECK((sd.array() > 0.0).all());
}

TEST_CASE("axis names") {
  CHECK(parse_axis("A1b") == Axis::A1b);
  CHECK(axis_name(Axis::A6) == "a6");
  CHECK_THROWS_AS(parse_axis("a9"), ContractError);
}

TEST_CASE("scenario grids") {
  AblationOptions o;
  o.seeds = 3;
  CHECK(ablation_scenarios(Axis::A1, o).size() == 15);
  CHECK(ablation_scenarios(Axis::A2, o).size() == 9);
  CHECK(ablation_scenarios(Axis::A4, o)[0].developers.size() == 3);
  CHECK(ablation_scenarios(Axis::A6, o)[0].axis == "a6:p=1.5");
  o.eps_values = std::vector<double>{0.5};
  CHECK(ablation_scenarios(Axis::A1b, o).size() == 3);
  o.seeds = 1;
  CHECK_THROWS_AS(ablation_scenarios(Axis::A1, o), ContractError);
}

TEST_CASE("a scenario yields rows in developer then rule order") {
  AblationOptions o;
  o.seeds = 2;
  o.eps_values = std::vector<double>{1.0};
  o.with_uf = true;
  o.spad.restarts = 2;
  const auto sc = ablation_scenarios(Axis::A1, o);
  const auto rows = run_scenario(sc[0], o);
  REQUIRE(rows.size() == 10);
  const char* rules[] = {"UNIF", "HP", "WP", "UF", "SPAD"};
  for (int i = 0; i < 10; ++i) {
    CHECK(rows[i].rule == rules[i % 5]);
    CHECK(rows[i].developer == (i < 5 ? "FS" : "BR"));
    CHECK(rows[i].converged);
  }
  CHECK(rows[4].bw <= rows[0].bw);
  CHECK(rows[2].bw == rows[0].bw);  // uniform welfare
}

TEST_CASE("rows CSV round-trips exactly") {
  ResultRow r{"a6:p=1.5", 10, 0.1, 3, "FS", "SPAD", 0.1, 1.0 / 3.0, 2.0 / 7.0, 0.123456789012345, 42, true};
  ResultRow bad = r;
  bad.converged = false;
  bad.bw = std::nan("");
  std::stringstream ss;
  write_rows_csv(ss, {r, bad});
  const auto back = read_rows_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].axis == r.axis);
  CHECK(back[0].eps_tot == r.eps_tot);
  CHECK(back[0].trh == r.trh);
  CHECK(back[0].bw == r.bw);
  CHECK(back[0].rel_bw == r.rel_bw);
  CHECK(back[0].iterations == 42);
  CHECK_FALSE(back[1].converged);
  CHECK(std::isnan(back[1].bw));

  std::istringstream wrong("not,a,header\n");
  CHECK_THROWS_AS(read_rows_csv(wrong), ContractError);
}

TEST_CASE("summaries pair by seed") {
  std::vector<ResultRow> rows;
  const double unif[] = {2.0, 4.0, 5.0, 8.0};
  const double spad_bw[] = {1.0, 3.0, 4.0, 6.0};
  for (int s = 0; s < 4; ++s) {
    rows.push_back({"a1", 10, 1.0, s, "FS", "UNIF", 0, 0, unif[s], 0, 0, true});
    rows.push_back({"a1", 10, 1.0, s, "FS", "SPAD", 0, 0, spad_bw[s], 0, 0, true});
  }
  const auto red = paired_reductions(rows, "a1", 10, 1.0, "FS", "SPAD", "UNIF");
  REQUIRE(red.size() == 4);
  CHECK(red[0] == doctest::Approx(50.0));
  CHECK(red[1] == doctest::Approx(25.0));
  CHECK(red[2] == doctest::Approx(20.0));
  CHECK(red[3] == doctest::Approx(25.0));

  const auto summary = summarize(rows);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].config == "d=10;eps_tot=1;developer=FS");
  CHECK(summary[0].rule_b == "UNIF");
  CHECK(summary[0].mean_reduction_pct == doctest::Approx(30.0));
  CHECK(summary[0].test.n == 4);
  CHECK(summary[0].test.p_holm == summary[0].test.p_t);

  rows[1].converged = false;
  CHECK(paired_reductions(rows, "a1", 10, 1.0, "FS", "SPAD", "UNIF").size() == 3);

  std::ostringstream os;
  write_summary_csv(os, summary);
  CHECK(os.str().rfind(kSummaryHeader, 0) == 0);
}

TEST_CASE("thread count does not change the rows") {
  AblationOptions o;
  o.seeds = 3;
  o.eps_values = std::vector<double>{0.5};
  o.spad.restarts = 2;
  o.workers = 1;
  const auto one = run_ablation(Axis::A1b, o);
  o.workers = 3;
  int callbacks = 0;
  const auto three = run_ablation(Axis::A1b, o, [&](const std::vector<ResultRow>&) { ++callbacks; });
  CHECK(callbacks == 3);
  std::ostringstream a, b;
  write_rows_csv(a, one);
  write_rows_csv(b, three);
  CHECK(a.str() == b.str());
}
