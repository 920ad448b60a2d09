#include "spad/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace spad::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

ResultRow failed_row(const Environment& env, const DeveloperType& dev, const std::string& rule) {
  ResultRow row;
  row.d = env.dim();
  row.eps_tot = env.eps_tot;
  row.developer = spad::label(dev);
  row.rule = rule;
  row.dh = row.trh = row.bw = row.rel_bw = kNaN;
  row.converged = false;
  return row;
}

const std::vector<double> kEpsGrid = {0.1, 0.5, 1.0, 2.0, 5.0};

}  // namespace

std::string label(const Rule& rule) {
  if (const auto* b = std::get_if<BaselineKind>(&rule)) return spad::label(*b);
  return "SPAD";
}

ResultRow evaluate_policy(const Environment& env, const AuditPolicy& policy, const DeveloperType& dev,
                          const std::string& rule_label) {
  try {
    const BestResponse r = best_response(env, policy, dev);
    const AuditMetrics m = compute_metrics(env, policy, r.m);
    ResultRow row;
    row.d = env.dim();
    row.eps_tot = env.eps_tot;
    row.developer = spad::label(dev);
    row.rule = rule_label;
    row.dh = m.dh;
    row.trh = m.trh;
    row.bw = m.bw;
    row.rel_bw = m.trh > 0.0 ? m.bw / m.trh : 0.0;
    row.converged = true;
    return row;
  } catch (const SolverError&) {
    return failed_row(env, dev, rule_label);
  }
}

ResultRow run_cell(const Environment& env, const DeveloperType& dev, const Rule& rule,
                   const SpadOptions& spad_opts) {
  if (const auto* b = std::get_if<BaselineKind>(&rule)) {
    return evaluate_policy(env, baseline_policy(*b, env), dev, spad::label(*b));
  }
  try {
    SpadOptions o = spad_opts;
    o.target = developer::FullyStrategic{};
    const SpadResult s = spad(env, o);
    ResultRow row = evaluate_policy(env, s.policy, dev, "SPAD");
    row.iterations = s.iterations;
    return row;
  } catch (const SolverError&) {
    return failed_row(env, dev, "SPAD");
  }
}

Axis parse_axis(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "a1") return Axis::A1;
  if (s == "a1b") return Axis::A1b;
  if (s == "a2") return Axis::A2;
  if (s == "a3") return Axis::A3;
  if (s == "a4") return Axis::A4;
  if (s == "a5") return Axis::A5;
  if (s == "a6") return Axis::A6;
  throw ContractError("unknown axis '" + name + "' (expected a1, a1b, a2, a3, a4, a5 or a6)");
}

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::A1: return "a1";
    case Axis::A1b: return "a1b";
    case Axis::A2: return "a2";
    case Axis::A3: return "a3";
    case Axis::A4: return "a4";
    case Axis::A5: return "a5";
    case Axis::A6: return "a6";
  }
  return "a1";
}

std::vector<Scenario> ablation_scenarios(Axis axis, const AblationOptions& opts) {
  if (opts.seeds < 2) throw ContractError("ablation: need at least two seeds");
  const std::string name = axis_name(axis);
  SamplingConfig base;
  base.master_seed = opts.master_seed;
  base.stream = name;
  const std::vector<DeveloperType> fs_only = {developer::FullyStrategic{}};

  std::vector<Scenario> out;
  auto add = [&](const std::string& label, const SamplingConfig& cfg, const std::vector<DeveloperType>& devs) {
    for (int s = 0; s < opts.seeds; ++s) out.push_back({label, cfg, s, devs});
  };

  switch (axis) {
    case Axis::A1:
    case Axis::A1b: {
      base.welfare = axis == Axis::A1 ? WelfareMode::Uniform : WelfareMode::Dirichlet;
      const std::vector<DeveloperType> devs = {developer::FullyStrategic{}, developer::BoundedlyRational{}};
      for (double eps : opts.eps_values.value_or(kEpsGrid)) {
        SamplingConfig cfg = base;
        cfg.eps_tot = eps;
        add(name, cfg, devs);
      }
      break;
    }
    case Axis::A2:
      for (int d : {5, 10, 20}) {
        SamplingConfig cfg = base;
        cfg.d = d;
        add(name, cfg, fs_only);
      }
      break;
    case Axis::A3:
      for (auto mode : {KappaMode::Homogeneous, KappaMode::Heterogeneous}) {
        SamplingConfig cfg = base;
        cfg.kappa = mode;
        add(mode == KappaMode::Homogeneous ? "a3:kappa=homogeneous" : "a3:kappa=heterogeneous", cfg, fs_only);
      }
      break;
    case Axis::A4:
      add(name, base,
          {developer::FullyStrategic{}, developer::BoundedlyRational{}, developer::NonStrategic{}});
      break;
    case Axis::A5:
      for (auto mode : {HarmMode::Sparse, HarmMode::Dense}) {
        SamplingConfig cfg = base;
        cfg.harm = mode;
        add(mode == HarmMode::Sparse ? "a5:h=sparse" : "a5:h=dense", cfg, fs_only);
      }
      break;
    case Axis::A6:
      for (double p : {1.5, 2.0, 3.0}) {
        SamplingConfig cfg = base;
        cfg.cost_p = p;
        add("a6:p=" + fmt(p), cfg, fs_only);
      }
      break;
  }
  return out;
}

std::vector<ResultRow> run_scenario(const Scenario& sc, const AblationOptions& opts) {
  const Environment env = sample_environment(sc.config, static_cast<std::uint64_t>(sc.seed));

  std::vector<Rule> rules = {BaselineKind{baseline::Uniform{}}, BaselineKind{baseline::HarmProportional{}},
                             BaselineKind{baseline::WelfareProportional{}}};
  if (opts.with_uf) rules.push_back(BaselineKind{baseline::UncertaintyFocused{harm_prior_std(sc.config)}});

  SpadOptions so = opts.spad;
  so.target = developer::FullyStrategic{};
  so.rng_seed = mix_seed({opts.spad.rng_seed, stream_hash(sc.axis), static_cast<std::uint64_t>(sc.seed)});
  std::optional<SpadResult> designed;
  try {
    designed = spad(env, so);
  } catch (const SolverError&) {
    designed.reset();
  }

  std::vector<ResultRow> rows;
  for (const auto& dev : sc.developers) {
    for (const auto& rule : rules) rows.push_back(run_cell(env, dev, rule));
    if (designed) {
      ResultRow row = evaluate_policy(env, designed->policy, dev, "SPAD");
      row.iterations = designed->iterations;
      rows.push_back(row);
    } else {
      rows.push_back(failed_row(env, dev, "SPAD"));
    }
  }
  for (auto& r : rows) {
    r.axis = sc.axis;
    r.seed = sc.seed;
  }
  return rows;
}

std::vector<ResultRow> run_ablation(Axis axis, const AblationOptions& opts,
                                    const std::function<void(const std::vector<ResultRow>&)>& on_scenario) {
  const std::vector<Scenario> scenarios = ablation_scenarios(axis, opts);
  std::vector<std::vector<ResultRow>> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink;
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        results[i] = run_scenario(scenarios[i], opts);
        if (on_scenario) {
          std::lock_guard<std::mutex> lock(sink);
          on_scenario(results[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(sink);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

// ---------------------------------------------------------------------------

void write_row(std::ostream& os, const ResultRow& r) {
  os << r.axis << ',' << r.d << ',' << fmt(r.eps_tot) << ',' << r.seed << ',' << r.developer << ','
     << r.rule << ',' << fmt(r.dh) << ',' << fmt(r.trh) << ',' << fmt(r.bw) << ',' << fmt(r.rel_bw) << ','
     << r.iterations << ',' << (r.converged ? "true" : "false") << '\n';
}

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kRowsHeader << '\n';
  for (const auto& r : rows) write_row(os, r);
}

std::vector<ResultRow> read_rows_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRowsHeader) throw ContractError("rows CSV: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw ContractError("rows CSV: expected 12 fields in '" + line + "'");
    ResultRow r;
    r.axis = f[0];
    r.d = std::stoi(f[1]);
    r.eps_tot = std::stod(f[2]);
    r.seed = std::stoi(f[3]);
    r.developer = f[4];
    r.rule = f[5];
    r.dh = std::stod(f[6]);
    r.trh = std::stod(f[7]);
    r.bw = std::stod(f[8]);
    r.rel_bw = std::stod(f[9]);
    r.iterations = std::stoi(f[10]);
    r.converged = f[11] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<double> paired_reductions(const std::vector<ResultRow>& rows, const std::string& axis, int d,
                                      double eps_tot, const std::string& developer,
                                      const std::string& rule_a, const std::string& rule_b) {
  std::map<int, double> a, b;
  for (const auto& r : rows) {
    if (r.axis != axis || r.d != d || r.eps_tot != eps_tot || r.developer != developer || !r.converged) continue;
    if (r.rule == rule_a) a[r.seed] = r.bw;
    if (r.rule == rule_b) b[r.seed] = r.bw;
  }
  std::vector<double> out;
  for (const auto& [seed, bw_b] : b) {
    const auto it = a.find(seed);
    if (it == a.end() || !(bw_b > 0.0)) continue;
    out.push_back(100.0 * (bw_b - it->second) / bw_b);
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, std::uint64_t seed) {
  struct Key {
    std::string axis;
    int d;
    double eps_tot;
    std::string developer;
    bool operator==(const Key& o) const {
      return axis == o.axis && d == o.d && eps_tot == o.eps_tot && developer == o.developer;
    }
  };
  std::vector<Key> groups;
  std::vector<std::vector<std::string>> group_rules;
  for (const auto& r : rows) {
    const Key k{r.axis, r.d, r.eps_tot, r.developer};
    auto it = std::find(groups.begin(), groups.end(), k);
    if (it == groups.end()) {
      groups.push_back(k);
      group_rules.emplace_back();
      it = groups.end() - 1;
    }
    auto& rules = group_rules[static_cast<std::size_t>(it - groups.begin())];
    if (std::find(rules.begin(), rules.end(), r.rule) == rules.end()) rules.push_back(r.rule);
  }

  std::vector<SummaryRow> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Key& k = groups[g];
    const auto& rules = group_rules[g];
    if (std::find(rules.begin(), rules.end(), "SPAD") == rules.end()) continue;
    for (const auto& rb : rules) {
      if (rb == "SPAD") continue;
      std::map<int, double> a, b;
      for (const auto& r : rows) {
        if (!(Key{r.axis, r.d, r.eps_tot, r.developer} == k) || !r.converged) continue;
        if (r.rule == "SPAD") a[r.seed] = r.bw;
        if (r.rule == rb) b[r.seed] = r.bw;
      }
      std::vector<double> va, vb;
      for (const auto& [s, bw_b] : b) {
        const auto it = a.find(s);
        if (it == a.end()) continue;
        vb.push_back(bw_b);
        va.push_back(it->second);
      }
      if (va.size() < 2) continue;
      const std::vector<double> red = paired_reductions(rows, k.axis, k.d, k.eps_tot, k.developer, "SPAD", rb);
      if (red.empty()) continue;
      SummaryRow s;
      s.axis = k.axis;
      s.config = "d=" + std::to_string(k.d) + ";eps_tot=" + fmt(k.eps_tot) + ";developer=" + k.developer;
      s.rule_a = "SPAD";
      s.rule_b = rb;
      s.mean_reduction_pct = stats::mean(red);
      const std::uint64_t stream = mix_seed({seed, static_cast<std::uint64_t>(out.size())});
      const stats::Interval ci = stats::bootstrap_ci(red, 10000, 0.95, stream);
      s.ci_lo = ci.lo;
      s.ci_hi = ci.hi;
      s.test = stats::paired_compare(vb, va, stream);
      out.push_back(std::move(s));
    }
  }
  std::vector<double> p;
  for (const auto& s : out) p.push_back(s.test.p_t);
  const std::vector<double> adj = stats::holm_bonferroni(p);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].test.p_holm = adj[i];
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    os << s.axis << ',' << s.config << ',' << s.rule_a << ',' << s.rule_b << ',' << fmt(s.mean_reduction_pct)
       << ',' << fmt(s.ci_lo) << ',' << fmt(s.ci_hi) << ',' << fmt(s.test.p_t) << ',' << fmt(s.test.p_wilcoxon)
       << ',' << fmt(s.test.cohens_d) << ',' << fmt(s.test.p_holm) << '\n';
  }
}

}  // namespace spad::bench
