#include <doctest.h>

#include "oracles.hpp"
#include "spad/model.hpp"
#include "spad/stats.hpp"

#include <cmath>
#include <random>

using namespace spad::stats;

TEST_CASE("Holm hand case") {
  const std::vector<double> adj = holm_bonferroni({0.01, 0.04, 0.03});
  CHECK(adj[0] == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(adj[1] == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(adj[2] == doctest::Approx(0.06).epsilon(1e-12));
  CHECK_THROWS_AS(holm_bonferroni({0.5, 1.5}), spad::ContractError);
}

TEST_CASE("Holm agrees with the textbook loop on random families") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> p(1 + i % 9);
    for (auto& x : p) x = u(rng) * u(rng);
    const auto got = holm_bonferroni(p);
    const auto want = oracle::holm(p);
    for (std::size_t j = 0; j < p.size(); ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-15));
  }
}

TEST_CASE("paired t on differences (1, 2, 3)") {
  const StatReport r = paired_compare({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0});
  const double t = 2.0 * std::sqrt(3.0);
  CHECK(r.t == doctest::Approx(t).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(3.464).epsilon(1e-3));
  CHECK(r.df == 2.0);
  CHECK(r.p_t == doctest::Approx(oracle::t2_two_sided_p(t)).epsilon(1e-10));
  CHECK(r.p_t == doctest::Approx(0.0742).epsilon(1e-3));
  CHECK(r.cohens_d == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.mean_diff == doctest::Approx(2.0));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("zero-variance differences are flagged") {
  const StatReport same = paired_compare({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  CHECK(same.degenerate);
  CHECK(same.p_t == 1.0);
  CHECK(same.p_wilcoxon == 1.0);
  const StatReport shifted = paired_compare({2.0, 3.0, 4.0}, {1.0, 2.0, 3.0});
  CHECK(shifted.degenerate);
  CHECK(shifted.p_t == 0.0);
  CHECK(shifted.ci_lo == 1.0);
  CHECK(shifted.ci_hi == 1.0);
}

TEST_CASE("exact signed-rank p matches enumeration") {
  const std::vector<double> diffs{1, -2, 3, 4, 5, -6, 7, 8, 9.5, -10};
  std::vector<double> zero(diffs.size(), 0.0);
  const StatReport r = paired_compare(diffs, zero);
  CHECK(r.wilcoxon_exact);
  CHECK(r.wilcoxon_w == 1 + 3 + 4 + 5 + 7 + 8 + 9);
  CHECK(r.p_wilcoxon == doctest::Approx(oracle::wilcoxon_exact_p(10, 37)).epsilon(1e-12));

  std::vector<double> all_pos(20);
  for (int i = 0; i < 20; ++i) all_pos[i] = i + 1.0;
  const StatReport s = paired_compare(all_pos, std::vector<double>(20, 0.0));
  CHECK(s.p_wilcoxon == doctest::Approx(2.0 / std::ldexp(1.0, 20)).epsilon(1e-12));
}

TEST_CASE("signed-rank normal approximation above 25 pairs") {
  std::vector<double> diffs;
  for (int i = 1; i <= 30; ++i) diffs.push_back(i % 4 == 0 ? -i : i);
  const StatReport r = paired_compare(diffs, std::vector<double>(30, 0.0));
  CHECK_FALSE(r.wilcoxon_exact);
  double w = 0.0;
  for (int i = 1; i <= 30; ++i) w += i % 4 == 0 ? 0 : i;
  const double mu = 30.0 * 31 / 4, sd = std::sqrt(30.0 * 31 * 61 / 24);
  const double z = (std::abs(w - mu) - 0.5) / sd;
  CHECK(r.wilcoxon_w == w);
  CHECK(r.p_wilcoxon == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-10));
}

TEST_CASE("bootstrap intervals") {
  const Interval flat = bootstrap_ci({0.7, 0.7, 0.7, 0.7});
  CHECK(flat.lo == 0.7);
  CHECK(flat.hi == 0.7);
  // Means of two draws from {0, 1} are 0, 0.5, 1 with mass 1/4, 1/2, 1/4.
  const Interval two = bootstrap_ci({0.0, 1.0});
  CHECK(two.lo == 0.0);
  CHECK(two.hi == 1.0);
  const Interval narrow = bootstrap_ci({0.0, 1.0}, 10000, 0.4);
  CHECK(narrow.lo == 0.5);
  CHECK(narrow.hi == 0.5);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(3.0, 1.0);
  std::vector<double> x(200);
  for (auto& v : x) v = n(rng);
  const Interval a = bootstrap_ci(x, 4000, 0.95, 17);
  const Interval b = bootstrap_ci(x, 4000, 0.95, 17);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo < mean(x));
  CHECK(a.hi > mean(x));
  // Half-width close to 1.96 s / sqrt(n).
  CHECK((a.hi - a.lo) / 2 == doctest::Approx(1.96 * sample_sd(x) / std::sqrt(200.0)).epsilon(0.15));
  CHECK_THROWS_AS(bootstrap_ci({}), spad::ContractError);
}

TEST_CASE("descriptive helpers") {
  CHECK(mean({1.0, 2.0, 6.0}) == 3.0);
  CHECK(sample_sd({1.0, 2.0, 3.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sample_sd({1.0}), spad::ContractError);
  CHECK_THROWS_AS(paired_compare({1.0}, {1.0}), spad::ContractError);
}
