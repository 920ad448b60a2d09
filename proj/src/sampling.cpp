#include "spad/bench.hpp"

#include <cmath>
#include <limits>

namespace spad::bench {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

double beta_draw(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

void SamplingConfig::validate() const {
  if (d < 1) throw ContractError("SamplingConfig: d must be at least 1");
  if (!(cost_p > 1.0)) throw ContractError("SamplingConfig: cost exponent must exceed 1");
  if (!(b_factor > 0.0)) throw ContractError("SamplingConfig: budget factor must be positive");
  if (!(eps_tot > 0.0)) throw ContractError("SamplingConfig: eps_tot must be positive");
}

std::uint64_t stream_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Vector sample_raw_harm(const SamplingConfig& config, Rng& rng) {
  Vector h(config.d);
  if (config.harm == HarmMode::Dense) {
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int j = 0; j < config.d; ++j) h[j] = u(rng);
  } else {
    for (int j = 0; j < config.d; ++j) h[j] = std::max(beta_draw(rng, 0.5, 2.0), kTiny);
  }
  return h;
}

Environment sample_environment(const SamplingConfig& config, std::uint64_t seed) {
  config.validate();
  const int d = config.d;
  Rng rng(mix_seed({config.master_seed, stream_hash(config.stream), seed}));

  Vector h = sample_raw_harm(config, rng);
  h *= static_cast<double>(d) / h.sum();

  Vector kappa = Vector::Ones(d);
  if (config.kappa == KappaMode::Heterogeneous) {
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int j = 0; j < d; ++j) kappa[j] = u(rng);
  }

  Vector w = Vector::Constant(d, 1.0 / d);
  if (config.welfare == WelfareMode::Dirichlet) {
    std::gamma_distribution<double> g(0.5, 1.0);
    for (int j = 0; j < d; ++j) w[j] = std::max(g(rng), kTiny);
    w /= w.sum();
  }

  Environment env = make_exponential_environment(h, w, kappa, config.b_factor * d, config.eps_tot,
                                                 config.cost_p, 1.0);
  env.validate();
  return env;
}

Vector harm_prior_std(const SamplingConfig& config, int draws) {
  config.validate();
  if (draws < 2) throw ContractError("harm_prior_std: need at least two draws");
  Rng rng(mix_seed({config.master_seed, stream_hash(config.stream + "/prior"), 0}));
  const int d = config.d;
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  for (int k = 0; k < draws; ++k) {
    Vector h = sample_raw_harm(config, rng);
    h *= static_cast<double>(d) / h.sum();
    sum += h;
    sum_sq += h.cwiseProduct(h);
  }
  const double n = draws;
  Vector var = (sum_sq - sum.cwiseProduct(sum) / n) / (n - 1.0);
  return var.cwiseMax(0.0).cwiseSqrt();
}

}  // namespace spad::bench
