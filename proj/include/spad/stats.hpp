#pragma once

#include <cstdint>
#include <vector>

namespace spad::stats {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the mean.
Interval bootstrap_ci(const std::vector<double>& samples, int resamples = 10000, double level = 0.95,
                      std::uint64_t seed = 20260101);

struct StatReport {
  int n = 0;
  double mean_diff = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p_t = 1.0;
  double wilcoxon_w = 0.0;  // sum of positive ranks
  double p_wilcoxon = 1.0;
  bool wilcoxon_exact = false;
  double cohens_d = 0.0;
  bool degenerate = false;  // zero-variance differences
  double p_holm = 1.0;      // filled in by the caller across a family of tests
};

/// Paired comparison on a - b: two-sided t test, Wilcoxon signed-rank
/// (exact null for n <= 25 non-zero differences, normal approximation
/// above), Cohen's d and a bootstrap interval of the mean difference.
StatReport paired_compare(const std::vector<double>& a, const std::vector<double>& b,
                          std::uint64_t seed = 20260101, int resamples = 10000);

/// Holm step-down adjustment, returned in the input order.
std::vector<double> holm_bonferroni(const std::vector<double>& pvals);

double mean(const std::vector<double>& x);
double sample_sd(const std::vector<double>& x);

}  // namespace spad::stats
