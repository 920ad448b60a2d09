#pragma once

#include "oracles.hpp"
#include "spad/model.hpp"

#include <random>

namespace support {

inline spad::Vector to_eigen(const oracle::Vec& v) {
  spad::Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline oracle::Vec to_std(const spad::Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

inline spad::Environment environment(const oracle::Game& g, double eps_tot) {
  return spad::make_exponential_environment(to_eigen(g.h), to_eigen(g.w), to_eigen(g.kappa), g.budget,
                                            eps_tot, g.p);
}

// Random d-dimensional game with a Dirichlet(1) query distribution and an
// eps split drawn uniformly on the scaled simplex.
struct Draw {
  oracle::Game game;
  oracle::Vec pi, eps;
  double eps_tot = 1.0;
};

inline oracle::Vec dirichlet_one(std::mt19937_64& rng, std::size_t d) {
  std::exponential_distribution<double> e(1.0);
  oracle::Vec v(d);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng));
  for (auto& x : v) x /= s;
  return v;
}

inline Draw random_draw(std::mt19937_64& rng, std::size_t d, double budget) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Draw r;
  r.game.h.resize(d);
  r.game.w.resize(d);
  r.game.kappa.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    r.game.h[j] = 0.5 + 1.5 * u(rng);
    r.game.w[j] = 0.2 + u(rng);
    r.game.kappa[j] = 0.2 + 1.8 * u(rng);
  }
  r.game.budget = budget;
  r.eps_tot = 0.5 + 2.5 * u(rng);
  r.pi = dirichlet_one(rng, d);
  r.eps = dirichlet_one(rng, d);
  for (auto& x : r.eps) x *= r.eps_tot;
  return r;
}

}  // namespace support
