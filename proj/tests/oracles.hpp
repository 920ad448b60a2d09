#pragma once

// Independent reference implementations used to check the library. Nothing
// here calls into the solvers under test; everything is closed form, plain
// bisection or brute force.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// Exponential detectability, exponential-decay harm (unit rate), power cost.
struct Game {
  Vec h, w, kappa;
  double p = 2.0;
  double budget = 1.0;
};

inline double alpha(double kappa, double eps) { return 1.0 - std::exp(-kappa * eps); }

inline Vec delta(const Game& g, const Vec& pi, const Vec& eps) {
  Vec d(g.h.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = pi[j] * alpha(g.kappa[j], eps[j]);
  return d;
}

inline double cost(const Game& g, const Vec& m) {
  double c = 0.0;
  for (double x : m) c += std::pow(x, g.p) / g.p;
  return c;
}

inline double residual(double h, double m) { return h * std::exp(-m); }

// Root of d h e^{-m} = s m^{p-1} on m >= 0 by bisection.
inline double foc_root(double d, double h, double s, double p) {
  if (d <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (d * h * std::exp(-hi) > s * std::pow(hi, p - 1.0)) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (d * h * std::exp(-mid) > s * std::pow(mid, p - 1.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Response {
  Vec m;
  double lambda = 0.0;
};

// Exact developer response: nested bisection on the multiplier.
inline Response best_response(const Game& g, const Vec& d) {
  const std::size_t n = g.h.size();
  auto at = [&](double lambda) {
    Vec m(n);
    for (std::size_t j = 0; j < n; ++j) m[j] = foc_root(d[j], g.h[j], 1.0 + lambda, g.p);
    return m;
  };
  Vec m0 = at(0.0);
  if (cost(g, m0) <= g.budget) return {m0, 0.0};
  double lo = 0.0, hi = 1.0;
  while (cost(g, at(hi)) > g.budget) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cost(g, at(mid)) > g.budget) lo = mid;
    else hi = mid;
  }
  return {at(hi), hi};
}

struct Metrics {
  double dh = 0.0, trh = 0.0, bw = 0.0;
};

inline Metrics metrics(const Game& g, const Vec& d, const Vec& m) {
  Metrics r;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double res = residual(g.h[j], m[j]);
    r.dh += d[j] * res;
    r.trh += g.w[j] * res;
    r.bw += g.w[j] * (1.0 - d[j]) * res;
  }
  return r;
}

inline double gap(const Game& g, const Vec& pi, const Vec& eps) {
  const Vec d = delta(g, pi, eps);
  return metrics(g, d, best_response(g, d).m).bw;
}

// Brute-force minimum of sum d_j g_j + C(m) over an n x n grid of the
// feasible box for d = 2.
inline double grid_minimum_2d(const Game& g, const Vec& d, int n = 200) {
  const double top = std::pow(g.p * g.budget, 1.0 / g.p);
  double best = INFINITY;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Vec m{top * a / (n - 1), top * b / (n - 1)};
      if (cost(g, m) > g.budget) continue;
      best = std::min(best, d[0] * residual(g.h[0], m[0]) + d[1] * residual(g.h[1], m[1]) + cost(g, m));
    }
  }
  return best;
}

// Simplex projection by bisection on the threshold tau with sum max(v - tau, 0) = 1.
inline Vec project_simplex(const Vec& v) {
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int i = 0; i < 200; ++i) {
    const double tau = 0.5 * (lo + hi);
    double s = 0.0;
    for (double x : v) s += std::max(x - tau, 0.0);
    if (s > 1.0) lo = tau;
    else hi = tau;
  }
  const double tau = 0.5 * (lo + hi);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

// Two-sided p value of Student's t with two degrees of freedom (closed form).
inline double t2_two_sided_p(double t) { return 1.0 - std::abs(t) / std::sqrt(2.0 + t * t); }

// Holm step-down, written as the textbook loop over sorted indices.
inline Vec holm(const Vec& p) {
  const std::size_t n = p.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  Vec out(n);
  double running = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    running = std::max(running, std::min(1.0, (n - r) * p[idx[r]]));
    out[idx[r]] = running;
  }
  return out;
}

// Exact two-sided Wilcoxon signed-rank p value by enumerating all sign
// assignments (distinct ranks 1..n).
inline double wilcoxon_exact_p(int n, int w_plus) {
  const int total = 1 << n;
  const double mu = n * (n + 1) / 4.0;
  const double obs = std::abs(w_plus - mu);
  int extreme = 0;
  for (int mask = 0; mask < total; ++mask) {
    int s = 0;
    for (int r = 0; r < n; ++r)
      if (mask & (1 << r)) s += r + 1;
    if (std::abs(s - mu) >= obs - 1e-12) ++extreme;
  }
  return std::min(1.0, static_cast<double>(extreme) / total);
}

}  // namespace oracle
