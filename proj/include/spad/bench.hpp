#pragma once

// Seeded environment sampling, ablation sweeps and their summaries.

#include "spad/design.hpp"
#include "spad/rng.hpp"
#include "spad/stats.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spad::bench {

inline constexpr std::uint64_t kDefaultMasterSeed = 20260101;

enum class HarmMode { Dense, Sparse };
enum class KappaMode { Heterogeneous, Homogeneous };
enum class WelfareMode { Uniform, Dirichlet };

struct SamplingConfig {
  int d = 10;
  HarmMode harm = HarmMode::Dense;        // Uniform[0.5, 1.5] or Beta(0.5, 2)
  KappaMode kappa = KappaMode::Heterogeneous;  // Uniform[0.1, 2] or 1
  double cost_p = 2.0;
  double b_factor = 1.0;                  // B = b_factor * d
  double eps_tot = 1.0;
  WelfareMode welfare = WelfareMode::Dirichlet;  // 1/d or Dirichlet(0.5)
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string stream = "default";         // axis id folded into the RNG stream

  void validate() const;
};

/// 64-bit FNV-1a, used to fold stream names into seeds.
std::uint64_t stream_hash(const std::string& name);

/// Deterministic in (master_seed, stream, seed): the generator is seeded with
/// mix_seed({master_seed, stream_hash(stream), seed}). Harms are rescaled to
/// sum to d. Every dimension uses exponential detectability, exponential-decay
/// harm with unit rate and the configured power-law cost.
Environment sample_environment(const SamplingConfig& config, std::uint64_t seed);

/// Raw harm draw before normalisation (exposed for tests).
Vector sample_raw_harm(const SamplingConfig& config, Rng& rng);

/// Per-dimension standard deviation of h over `draws` pre-draws of the same
/// configuration, from a dedicated stream. Feeds the uncertainty-focused rule.
Vector harm_prior_std(const SamplingConfig& config, int draws = 200);

// ---------------------------------------------------------------------------

struct SpadRule {};
using Rule = std::variant<BaselineKind, SpadRule>;
std::string label(const Rule& rule);

struct ResultRow {
  std::string axis;  // axis id, with the varied setting for a3, a5, a6 ("a6:p=1.5")
  int d = 0;
  double eps_tot = 0.0;
  int seed = 0;
  std::string developer;
  std::string rule;
  double dh = 0.0;
  double trh = 0.0;
  double bw = 0.0;
  double rel_bw = 0.0;
  int iterations = 0;
  bool converged = false;  // false when a solver failed; metrics are then NaN
};

/// Evaluates one (environment, developer, rule) cell. A SPAD rule runs the
/// designer against the fully strategic developer, then evaluates the
/// resulting policy against `dev`.
ResultRow run_cell(const Environment& env, const DeveloperType& dev, const Rule& rule,
                   const SpadOptions& spad_opts = {});

/// Evaluates a fixed policy against a developer (no designer run).
ResultRow evaluate_policy(const Environment& env, const AuditPolicy& policy, const DeveloperType& dev,
                          const std::string& rule_label);

enum class Axis { A1, A1b, A2, A3, A4, A5, A6 };

/// Accepts "a1", "A1b", ... Throws ContractError otherwise.
Axis parse_axis(const std::string& name);
std::string axis_name(Axis axis);

struct AblationOptions {
  int seeds = 20;
  int workers = 1;
  std::uint64_t master_seed = kDefaultMasterSeed;
  /// Restricts the eps_tot values swept by a1/a1b.
  std::optional<std::vector<double>> eps_values;
  /// Adds the uncertainty-focused baseline to the rule set.
  bool with_uf = false;
  SpadOptions spad;
};

/// One sampled environment of a sweep, with the developers and rules it is
/// evaluated against.
struct Scenario {
  std::string axis;
  SamplingConfig config;
  int seed = 0;
  std::vector<DeveloperType> developers;
};

std::vector<Scenario> ablation_scenarios(Axis axis, const AblationOptions& opts);

/// Rows of one scenario in (developer, rule) order. SPAD runs once per scenario.
std::vector<ResultRow> run_scenario(const Scenario& scenario, const AblationOptions& opts);

/// Runs every scenario on `opts.workers` threads. Rows come back in scenario
/// order regardless of scheduling. `on_scenario`, when set, is called under
/// a lock as each scenario finishes (completion order).
std::vector<ResultRow> run_ablation(
    Axis axis, const AblationOptions& opts,
    const std::function<void(const std::vector<ResultRow>&)>& on_scenario = {});

inline constexpr const char* kRowsHeader =
    "axis,d,eps_tot,seed,developer,rule,DH,TRH,B_w,rel_Bw,iterations,converged";
inline constexpr const char* kSummaryHeader =
    "axis,config,rule_a,rule_b,mean_reduction_pct,ci_lo,ci_hi,p_t,p_wilcoxon,cohens_d,p_holm";

void write_row(std::ostream& os, const ResultRow& row);
void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// Parses a rows CSV written by write_rows_csv.
std::vector<ResultRow> read_rows_csv(std::istream& is);

struct SummaryRow {
  std::string axis;
  std::string config;  // "d=10;eps_tot=0.5;developer=FS"
  std::string rule_a;  // the rule being credited (SPAD)
  std::string rule_b;  // the comparison baseline
  double mean_reduction_pct = 0.0;  // mean over seeds of 100 (B_w,b - B_w,a) / B_w,b
  double ci_lo = 0.0;               // bootstrap interval of that mean, in percent
  double ci_hi = 0.0;
  stats::StatReport test;           // paired tests on (B_w,b, B_w,a)
};

/// SPAD against every other rule within each (axis, d, eps_tot, developer)
/// group, paired by seed, with Holm adjustment across the whole table.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, std::uint64_t seed = kDefaultMasterSeed);

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Per-seed relative reductions 100 (B_w,b - B_w,a) / B_w,b for one group,
/// seeds matched; rows with converged = false are skipped in both rules.
std::vector<double> paired_reductions(const std::vector<ResultRow>& rows, const std::string& axis, int d,
                                      double eps_tot, const std::string& developer,
                                      const std::string& rule_a, const std::string& rule_b);

}  // namespace spad::bench
