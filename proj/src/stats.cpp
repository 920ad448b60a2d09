#include "spad/stats.hpp"

#include "spad/model.hpp"
#include "spad/rng.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spad::stats {

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(i);
  return s[i] + frac * (s[i + 1] - s[i]);
}

// Exact two-sided p-value of the signed-rank statistic. Ranks are doubled so
// that tied (average) ranks stay integral.
double wilcoxon_exact_p(const std::vector<int>& doubled_ranks, int w_doubled) {
  const int total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0);
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  int reach = 0;
  for (int r : doubled_ranks) {
    for (int s = reach; s >= 0; --s) {
      if (count[s] != 0.0) count[s + r] += count[s];
    }
    reach += r;
  }
  const double all = std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
  double lower = 0.0;
  double upper = 0.0;
  for (int s = 0; s <= total; ++s) {
    if (s <= w_doubled) lower += count[s];
    if (s >= w_doubled) upper += count[s];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

}  // namespace

double mean(const std::vector<double>& x) {
  if (x.empty()) throw ContractError("mean: empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) throw ContractError("sample_sd: need at least two samples");
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

Interval bootstrap_ci(const std::vector<double>& samples, int resamples, double level,
                      std::uint64_t seed) {
  if (samples.empty()) throw ContractError("bootstrap_ci: empty sample");
  if (resamples < 1) throw ContractError("bootstrap_ci: resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw ContractError("bootstrap_ci: level must lie in (0, 1)");
  const std::size_t n = samples.size();
  if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples[0]; })) {
    return {samples[0], samples[0]};
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += samples[pick(rng)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

StatReport paired_compare(const std::vector<double>& a, const std::vector<double>& b,
                          std::uint64_t seed, int resamples) {
  if (a.size() != b.size()) throw ContractError("paired_compare: samples differ in length");
  if (a.size() < 2) throw ContractError("paired_compare: need at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];

  StatReport r;
  r.n = static_cast<int>(n);
  r.mean_diff = mean(diff);
  const Interval ci = bootstrap_ci(diff, resamples, 0.95, seed);
  r.ci_lo = ci.lo;
  r.ci_hi = ci.hi;
  r.df = static_cast<double>(n - 1);

  const double sd = sample_sd(diff);
  if (sd == 0.0) {
    r.degenerate = true;
    r.cohens_d = 0.0;
    r.t = r.mean_diff == 0.0 ? 0.0 : std::copysign(INFINITY, r.mean_diff);
    r.p_t = r.mean_diff == 0.0 ? 1.0 : 0.0;
  } else {
    r.cohens_d = r.mean_diff / sd;
    r.t = r.mean_diff / (sd / std::sqrt(static_cast<double>(n)));
    const boost::math::students_t dist(r.df);
    r.p_t = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  }

  // Signed-rank test on the non-zero differences, average ranks for ties.
  std::vector<double> nz;
  for (double v : diff) {
    if (v != 0.0) nz.push_back(v);
  }
  const std::size_t k = nz.size();
  if (k == 0) {
    r.p_wilcoxon = 1.0;
    r.wilcoxon_exact = true;
    return r;
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return std::abs(nz[i]) < std::abs(nz[j]); });
  std::vector<int> doubled(k);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
    const int rank2 = static_cast<int>(i + j + 2);  // twice the average of ranks i+1..j+1
    for (std::size_t t = i; t <= j; ++t) doubled[order[t]] = rank2;
    const double tsize = static_cast<double>(j - i + 1);
    tie_term += tsize * tsize * tsize - tsize;
    i = j + 1;
  }
  int w2 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (nz[i] > 0.0) w2 += doubled[i];
  }
  r.wilcoxon_w = 0.5 * w2;
  if (k <= 25) {
    r.wilcoxon_exact = true;
    r.p_wilcoxon = wilcoxon_exact_p(doubled, w2);
  } else {
    const double kk = static_cast<double>(k);
    const double mu = kk * (kk + 1.0) / 4.0;
    const double var = kk * (kk + 1.0) * (2.0 * kk + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      r.p_wilcoxon = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(r.wilcoxon_w - mu) - 0.5) / std::sqrt(var);
      r.p_wilcoxon = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), z)));
    }
  }
  return r;
}

std::vector<double> holm_bonferroni(const std::vector<double>& pvals) {
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("holm_bonferroni: p-values must lie in [0, 1]");
  }
  const std::size_t m = pvals.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pvals[i] < pvals[j]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double scaled = static_cast<double>(m - rank) * pvals[order[rank]];
    running = std::max(running, std::min(1.0, scaled));
    adjusted[order[rank]] = running;
  }
  return adjusted;
}

}  // namespace spad::stats
