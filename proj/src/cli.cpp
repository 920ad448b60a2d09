#include "spad/cli.hpp"

#include "spad/bench.hpp"
#include "spad/design.hpp"
#include "spad/model_io.hpp"
#include "spad/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace spad::cli {

namespace {

namespace fs = std::filesystem;

/// Any failure to obtain or decode an input file.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Any failure to write an output.
struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto load(const std::string& path, F&& decode) {
  try {
    return decode(read_json_file(path));
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw OutputError("write failed for " + path.string());
}

std::uint64_t master_seed() {
  const char* env = std::getenv("SPAD_MASTER_SEED");
  if (env == nullptr || *env == '\0') return bench::kDefaultMasterSeed;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(env, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(env).size()) throw ContractError("SPAD_MASTER_SEED must be an unsigned integer");
  return v;
}

DeveloperType parse_developer(const std::string& name, int steps, double eta, double tol) {
  if (name == "FS" || name == "fs") return developer::FullyStrategic{tol};
  if (name == "BR" || name == "br") return developer::BoundedlyRational{steps, eta};
  if (name == "NS" || name == "ns") return developer::NonStrategic{};
  throw ContractError("unknown developer type '" + name + "' (FS, BR or NS)");
}

BaselineKind parse_baseline(const std::string& name, const std::vector<double>& h_std) {
  if (name == "UNIF") return baseline::Uniform{};
  if (name == "HP") return baseline::HarmProportional{};
  if (name == "WP") return baseline::WelfareProportional{};
  if (name == "ORC") return baseline::Oracle{};
  if (name == "UF") {
    if (h_std.empty()) throw ContractError("UF needs --h-std");
    return baseline::UncertaintyFocused{Eigen::Map<const Vector>(h_std.data(), static_cast<Eigen::Index>(h_std.size()))};
  }
  throw ContractError("unknown baseline '" + name + "' (UNIF, HP, WP, UF or ORC)");
}

Json response_json(const BestResponse& r) {
  return Json{{"m", vector_to_json(r.m)},         {"lambda", r.lambda},
              {"objective", r.objective},         {"cost_used", r.cost_used},
              {"kkt_residual", r.kkt_residual},   {"converged", r.converged},
              {"iterations", r.iterations}};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

int run_example(const ExampleConstants& expected, std::ostream& out) {
  const Environment env = worked_example_environment();
  const AuditPolicy uniform = baseline_policy(baseline::Uniform{}, env);
  const AuditPolicy welfare = AuditPolicy::create(Vector{{0.6, 0.2, 0.2}}, Vector{{2.4, 0.3, 0.3}});
  const BestResponse ru = solve_fs(env, uniform);
  const BestResponse rw = solve_fs(env, welfare);
  const AuditMetrics mu = compute_metrics(env, uniform, ru.m);
  const AuditMetrics mw = compute_metrics(env, welfare, rw.m);

  struct Line {
    std::string name;
    double got;
    double want;
  };
  const std::vector<Line> lines = {
      {"uniform DH", mu.dh, expected.uniform_dh},
      {"uniform TRH", mu.trh, expected.uniform_trh},
      {"uniform B_w", mu.bw, expected.uniform_bw},
      {"welfare m*_1", rw.m[0], expected.welfare_m[0]},
      {"welfare m*_2", rw.m[1], expected.welfare_m[1]},
      {"welfare m*_3", rw.m[2], expected.welfare_m[2]},
      {"welfare TRH", mw.trh, expected.welfare_trh},
      {"welfare B_w", mw.bw, expected.welfare_bw},
  };

  out << "worked example: h=(1,1,1) w=(3,1,1) kappa=1 beta=1 quadratic cost B=1.5 eps_tot=3\n";
  out << "uniform       pi=(1/3,1/3,1/3) eps=(1,1,1)       m*=(" << fixed(ru.m[0]) << ", " << fixed(ru.m[1])
      << ", " << fixed(ru.m[2]) << ")\n";
  out << "welfare-aware pi=(0.6,0.2,0.2) eps=(2.4,0.3,0.3) m*=(" << fixed(rw.m[0]) << ", " << fixed(rw.m[1])
      << ", " << fixed(rw.m[2]) << ")\n\n";
  out << std::left << std::setw(14) << "quantity" << std::right << std::setw(10) << "computed" << std::setw(10)
      << "reference" << std::setw(11) << "abs diff" << "  status\n";
  bool ok = true;
  for (const auto& l : lines) {
    const double diff = std::abs(l.got - l.want);
    const bool pass = diff <= expected.tolerance;
    ok = ok && pass;
    out << std::left << std::setw(14) << l.name << std::right << std::setw(10) << fixed(l.got, 4)
        << std::setw(10) << fixed(l.want, 3) << std::setw(11) << fixed(diff, 5) << "  " << (pass ? "ok" : "MISMATCH")
        << '\n';
  }
  const double reduction = 100.0 * (mu.bw - mw.bw) / mu.bw;
  out << "\nB_w reduction, welfare-aware vs uniform: " << fixed(reduction, 1) << "%\n";
  out << (ok ? "all values within " : "values differ by more than ") << expected.tolerance << '\n';
  return ok ? kOk : kVerificationFailed;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Strategic private audit design: best responses, audit design, sweeps and checks", "spad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // example
  auto* example = app.add_subcommand("example", "Reproduce the three-dimension worked example");

  // solve
  std::string solve_env, solve_policy, solve_baseline = "UNIF", solve_dev = "FS";
  std::vector<double> solve_hstd;
  int br_steps = 50;
  double br_eta = 0.05, fs_tol = 1e-6;
  auto* solve = app.add_subcommand("solve", "Best response and metrics for one policy");
  solve->add_option("--env", solve_env, "Environment JSON file")->required();
  auto* policy_opt = solve->add_option("--policy", solve_policy, "Policy JSON file");
  solve->add_option("--baseline", solve_baseline, "UNIF, HP, WP, UF or ORC (when --policy is absent)")
      ->excludes(policy_opt)
      ->capture_default_str();
  solve->add_option("--h-std", solve_hstd, "Prior standard deviations of h for UF");
  solve->add_option("--developer", solve_dev, "FS, BR or NS")->capture_default_str();
  solve->add_option("--steps", br_steps, "BR projected-gradient steps")->capture_default_str();
  solve->add_option("--eta", br_eta, "BR step size")->capture_default_str();
  solve->add_option("--tol", fs_tol, "FS gradient tolerance")->capture_default_str();

  // spad
  std::string spad_env, spad_trace, spad_out, spad_mode = "analytic", spad_target = "FS", spad_robust;
  SpadOptions so;
  double eta0 = 0.0, fd_step = 1e-3;
  std::optional<std::uint64_t> spad_seed;
  auto* sp = app.add_subcommand("spad", "Design an audit policy by projected hypergradient descent");
  sp->add_option("--env", spad_env, "Environment JSON file")->required();
  sp->add_option("--eta0", eta0, "Initial step (default 0.1 * eps_tot)");
  sp->add_option("--decay", so.decay, "Step decay factor")->capture_default_str();
  sp->add_option("--decay-every", so.decay_every, "Iterations between decays")->capture_default_str();
  sp->add_option("--tol", so.tol, "Gradient-mapping stopping tolerance")->capture_default_str();
  sp->add_option("--t-max", so.t_max, "Outer iterations per restart")->capture_default_str();
  sp->add_option("--restarts", so.restarts, "Number of restarts")->capture_default_str();
  sp->add_option("--seed", spad_seed, "Restart seed (default: master seed)");
  sp->add_option("--hypergrad", spad_mode, "analytic or fd")->capture_default_str();
  sp->add_option("--fd-step", fd_step, "Finite-difference step")->capture_default_str();
  sp->add_option("--target", spad_target, "Developer type optimised against: FS, BR or NS")->capture_default_str();
  sp->add_option("--robust", spad_robust, "Comma-separated type set for the min-max variant, e.g. FS,BR");
  sp->add_option("--trace", spad_trace, "Write the optimisation trace CSV here");
  sp->add_option("--out", spad_out, "Write the result JSON here as well as to stdout");

  // sweep
  std::string sweep_axis, sweep_out = "results";
  int sweep_seeds = 20, sweep_workers = 1;
  std::vector<double> sweep_eps;
  bool with_uf = false;
  auto* sweep = app.add_subcommand("sweep", "Run an ablation axis and write rows.csv and summary.csv");
  sweep->add_option("axis,--axis", sweep_axis, "a1, a1b, a2, a3, a4, a5 or a6 (positional or --axis)");
  sweep->add_option("--seeds", sweep_seeds, "Seeds per configuration (>= 2)")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output directory")->capture_default_str();
  sweep->add_option("--workers", sweep_workers, "Worker threads")->capture_default_str();
  sweep->add_option("--eps", sweep_eps, "Restrict eps_tot values for a1/a1b");
  sweep->add_flag("--with-uf", with_uf, "Add the uncertainty-focused baseline");

  // verify
  std::string check = "all", verify_out;
  verify::CheckOptions vo;
  auto* ver = app.add_subcommand("verify", "Run numerical property checks");
  ver->add_option("check,--check", check,
                  "theorem1, hyp-vi, corollary, lower-bound, counterexample, hypergrad, a1-bands, a1b-bands, "
                  "br-sign or all (positional or --check)")
      ->capture_default_str();
  ver->add_option("--cells", vo.cells, "Screened cells for theorem1")->capture_default_str();
  ver->add_option("--seeds", vo.seeds, "Seeds per configuration for band checks")->capture_default_str();
  ver->add_option("--workers", vo.workers, "Worker threads for band checks")->capture_default_str();
  ver->add_option("--out", verify_out, "Directory for one JSON file per report");

  // calibrate
  std::string mech, cal_spec, cal_out;
  detect::GaussianReduced gauss;
  detect::LaplaceReduced lap;
  detect::RandomizedResponseReduced rr;
  double sensitivity = 1.0, level = 0.05, h_ref = 1.0;
  auto* cal = app.add_subcommand("calibrate", "Calibrate a reduced-form mechanism and fit the exponential surrogate");
  auto* mech_opt = cal->add_option("--mechanism", mech, "gaussian, laplace or rr");
  cal->add_option("--spec", cal_spec, "Detectability JSON file instead of --mechanism")->excludes(mech_opt);
  cal->add_option("--sensitivity", sensitivity, "Sensitivity (gaussian, laplace)")->capture_default_str();
  cal->add_option("--delta", gauss.delta_dp, "DP relaxation delta (gaussian)")->capture_default_str();
  cal->add_option("--level", level, "Test level (gaussian, rr)")->capture_default_str();
  cal->add_option("--h-ref", h_ref, "Reference residual harm")->capture_default_str();
  cal->add_option("--c-null", lap.c_null, "Null threshold (laplace)")->capture_default_str();
  cal->add_option("--n", rr.n, "Sample count (rr)")->capture_default_str();
  cal->add_option("--out", cal_out, "Write the calibration JSON here as well as to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::uint64_t seed = master_seed();

    if (*example) return run_example(ExampleConstants{}, out);

    if (*solve) {
      const Environment env = load(solve_env, environment_from_json);
      const AuditPolicy policy = solve_policy.empty() ? baseline_policy(parse_baseline(solve_baseline, solve_hstd), env)
                                                      : load(solve_policy, policy_from_json);
      const DeveloperType dev = parse_developer(solve_dev, br_steps, br_eta, fs_tol);
      check_feasible(env, policy);
      const BestResponse r = best_response(env, policy, dev);
      const AuditMetrics m = compute_metrics(env, policy, r.m);
      out << Json{{"developer", label(dev)},
                  {"policy", to_json(policy)},
                  {"response", response_json(r)},
                  {"metrics", to_json(m)}}
                 .dump(2)
          << '\n';
      return kOk;
    }

    if (*sp) {
      const Environment env = load(spad_env, environment_from_json);
      if (sp->count("--eta0") > 0) so.eta0 = eta0;
      so.rng_seed = spad_seed.value_or(seed);
      if (spad_mode == "analytic") {
        so.hypergrad_mode = hypergrad::Analytic{};
      } else if (spad_mode == "fd") {
        so.hypergrad_mode = hypergrad::FiniteDifference{fd_step};
      } else {
        throw ContractError("--hypergrad must be analytic or fd");
      }
      so.target = parse_developer(spad_target, 50, 0.05, 1e-6);

      Json result;
      OptimTrace trace;
      if (spad_robust.empty()) {
        const SpadResult res = spad(env, so);
        trace = res.trace;
        result = {{"policy", to_json(res.policy)},
                  {"B_w", res.bw},
                  {"iterations", res.iterations},
                  {"converged", res.converged},
                  {"selected_restart", res.trace.selected_restart},
                  {"restart_B_w", res.trace.restart_bw}};
      } else {
        std::vector<WeightedType> types;
        for (const auto& t : split_list(spad_robust)) types.push_back({parse_developer(t, 50, 0.05, 1e-6), 1.0});
        const RobustResult res = robust_spad(env, types, so);
        trace = res.inner.trace;
        Json per_type = Json::object();
        for (std::size_t i = 0; i < types.size(); ++i) per_type[label(types[i].type)] = res.type_bw[i];
        result = {{"policy", to_json(res.policy)},
                  {"worst_B_w", res.worst_bw},
                  {"B_w_by_type", per_type},
                  {"weighted_B_w", res.weighted_bw},
                  {"rounds", res.rounds},
                  {"worst_type_history", res.worst_type_history}};
      }
      const std::string text = result.dump(2) + "\n";
      if (!spad_trace.empty()) write_text(spad_trace, trace_csv(trace));
      if (!spad_out.empty()) write_text(spad_out, text);
      out << text;
      return kOk;
    }

    if (*sweep) {
      if (sweep_axis.empty()) throw ContractError("sweep needs an axis");
      const bench::Axis axis = bench::parse_axis(sweep_axis);
      bench::AblationOptions ao;
      ao.seeds = sweep_seeds;
      ao.workers = sweep_workers;
      ao.master_seed = seed;
      ao.with_uf = with_uf;
      if (!sweep_eps.empty()) ao.eps_values = sweep_eps;
      if (ao.seeds < 2) throw ContractError("--seeds must be at least 2");
      if (ao.workers < 1) throw ContractError("--workers must be at least 1");

      const fs::path dir(sweep_out);
      std::error_code ec;
      fs::create_directories(dir, ec);
      const fs::path partial = dir / "rows.partial.csv";
      std::ofstream progress(partial, std::ios::binary);
      if (!progress) throw OutputError("cannot write " + partial.string());
      progress << bench::kRowsHeader << '\n';
      const auto rows = bench::run_ablation(axis, ao, [&](const std::vector<bench::ResultRow>& batch) {
        for (const auto& r : batch) bench::write_row(progress, r);
        progress.flush();
      });
      progress.close();

      std::ostringstream rows_csv, summary_csv;
      bench::write_rows_csv(rows_csv, rows);
      const auto summary = bench::summarize(rows, seed);
      bench::write_summary_csv(summary_csv, summary);
      write_text(dir / "rows.csv", rows_csv.str());
      write_text(dir / "summary.csv", summary_csv.str());
      fs::remove(partial, ec);

      out << "axis " << bench::axis_name(axis) << ": " << rows.size() << " rows, " << sweep_seeds
          << " seeds per configuration\n";
      out << std::left << std::setw(20) << "axis" << std::setw(34) << "config" << std::setw(6) << "vs" << std::right
          << std::setw(10) << "mean %" << std::setw(20) << "95% CI" << std::setw(10) << "p_holm" << '\n';
      for (const auto& s : summary) {
        out << std::left << std::setw(20) << s.axis << std::setw(34) << s.config << std::setw(6) << s.rule_b
            << std::right << std::setw(10) << fixed(s.mean_reduction_pct, 2) << std::setw(20)
            << ("[" + fixed(s.ci_lo, 2) + ", " + fixed(s.ci_hi, 2) + "]") << std::setw(10)
            << fixed(s.test.p_holm, 4) << '\n';
      }
      out << "wrote " << (dir / "rows.csv").string() << " and " << (dir / "summary.csv").string() << '\n';
      return kOk;
    }

    if (*ver) {
      vo.master_seed = seed;
      const auto names = verify::check_names();
      if (std::find(names.begin(), names.end(), check) == names.end()) {
        throw ContractError("unknown check '" + check + "'");
      }
      const auto reports = verify::run_check(check, vo);
      int failed = 0;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        const Json j = verify::to_json(reports[i]);
        out << j.dump() << '\n';
        if (!verify_out.empty()) {
          write_text(fs::path(verify_out) / (reports[i].check + "_" + std::to_string(i) + ".json"), j.dump(2) + "\n");
        }
        if (!reports[i].ok()) ++failed;
      }
      out << "summary: " << reports.size() - failed << "/" << reports.size() << " reports pass or are not applicable\n";
      return failed == 0 ? kOk : kVerificationFailed;
    }

    if (*cal) {
      DetectabilitySpec mechanism;
      if (!cal_spec.empty()) {
        mechanism = load(cal_spec, detectability_from_json);
      } else if (mech == "gaussian") {
        gauss.sensitivity = sensitivity;
        gauss.level = level;
        gauss.h_ref = h_ref;
        mechanism = gauss;
      } else if (mech == "laplace") {
        lap.sensitivity = sensitivity;
        lap.h_ref = h_ref;
        mechanism = lap;
      } else if (mech == "rr") {
        rr.level = level;
        rr.h_ref = h_ref;
        mechanism = rr;
      } else {
        throw ContractError("--mechanism must be gaussian, laplace or rr (or pass --spec)");
      }
      const Calibration c = calibrate_mechanism(mechanism);
      Json table = Json::array();
      for (double eps : {0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        table.push_back({{"eps", eps},
                         {"alpha", eval_detectability(c.curve, eps).alpha},
                         {"alpha_surrogate", -std::expm1(-c.kappa_fit * eps)}});
      }
      const std::string text =
          Json{{"mechanism", to_json(c.curve)}, {"kappa_fit", c.kappa_fit}, {"table", table}}.dump(2) + "\n";
      if (!cal_out.empty()) write_text(cal_out, text);
      out << text;
      return kOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kVerificationFailed;
  }
  return kUsage;
}

}  // namespace spad::cli
