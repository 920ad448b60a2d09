#include <doctest.h>

#include "spad/cli.hpp"
#include "spad/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "spad");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = spad::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spad_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("example passes and a corrupted constant fails") {
  const Outcome ok = invoke({"example"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("all values within") != std::string::npos);

  spad::cli::ExampleConstants bad;
  bad.welfare_bw = 2.76;
  std::ostringstream sink;
  CHECK(spad::cli::run_example(bad, sink) == spad::cli::kVerificationFailed);
}

TEST_CASE("usage errors exit 64, help exits 0") {
  CHECK(invoke({}).code == 64);
  CHECK(invoke({"frobnicate"}).code == 64);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"sweep", "a9"}).code == 64);
  CHECK(invoke({"verify", "nope"}).code == 64);
}

TEST_CASE("missing input files exit 2") {
  CHECK(invoke({"solve", "--env", "/nonexistent/env.json"}).code == 2);
}

TEST_CASE("solve and spad on a JSON environment") {
  const fs::path dir = scratch("solve");
  write(dir / "env.json", spad::to_json(spad::worked_example_environment()).dump());
  const Outcome s = invoke({"solve", "--env", (dir / "env.json").string(), "--baseline", "UNIF"});
  REQUIRE(s.code == 0);
  const auto j = spad::Json::parse(s.out);
  CHECK(j["metrics"]["B_w"].get<double>() == doctest::Approx(3.308).epsilon(2e-3));

  const Outcome br = invoke({"solve", "--env", (dir / "env.json").string(), "--developer", "BR", "--steps", "3"});
  CHECK(br.code == 0);
  CHECK(spad::Json::parse(br.out)["developer"] == "BR");

  write(dir / "bad_policy.json", R"({"pi": [0.9, 0.9, 0.9], "eps": [1, 1, 1]})");
  CHECK(invoke({"solve", "--env", (dir / "env.json").string(), "--policy", (dir / "bad_policy.json").string()}).code == 2);
  write(dir / "greedy_policy.json", R"({"pi": [0.4, 0.3, 0.3], "eps": [2, 2, 2]})");
  CHECK(invoke({"solve", "--env", (dir / "env.json").string(), "--policy", (dir / "greedy_policy.json").string()}).code == 64);

  const Outcome d = invoke({"spad", "--env", (dir / "env.json").string(), "--restarts", "2", "--trace",
                            (dir / "trace.csv").string(), "--out", (dir / "result.json").string()});
  REQUIRE(d.code == 0);
  CHECK(spad::Json::parse(slurp(dir / "result.json"))["B_w"].get<double>() < 3.308);
  CHECK(slurp(dir / "trace.csv").rfind("iteration,restart,B_w,grad_norm,step\n", 0) == 0);

  const Outcome robust = invoke({"spad", "--env", (dir / "env.json").string(), "--restarts", "1", "--t-max", "30",
                                 "--robust", "FS,NS"});
  CHECK(robust.code == 0);
  CHECK(spad::Json::parse(robust.out).contains("worst_B_w"));
  CHECK(invoke({"spad", "--env", (dir / "env.json").string(), "--hypergrad", "magic"}).code == 64);
}

TEST_CASE("sweep writes rows and summary") {
  const fs::path dir = scratch("sweep");
  const Outcome r = invoke({"sweep", "a2", "--seeds", "2", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "rows.csv"));
  CHECK_FALSE(fs::exists(dir / "rows.partial.csv"));
  CHECK(slurp(dir / "summary.csv").rfind("axis,config,rule_a,rule_b", 0) == 0);
  CHECK(invoke({"sweep", "a2", "--seeds", "2", "--out", "/proc/forbidden/dir"}).code == 2);
}

TEST_CASE("verify exit status follows the reports") {
  CHECK(invoke({"verify", "lower-bound"}).code == 0);
  const fs::path dir = scratch("verify");
  CHECK(invoke({"verify", "--check", "hyp-vi", "--out", dir.string()}).code == 0);
  CHECK_FALSE(fs::is_empty(dir));
}

TEST_CASE("calibrate") {
  const Outcome g = invoke({"calibrate", "--mechanism", "gaussian"});
  REQUIRE(g.code == 0);
  CHECK(spad::Json::parse(g.out)["kappa_fit"].get<double>() > 0.0);
  CHECK(invoke({"calibrate", "--mechanism", "laplace", "--c-null", "2"}).code == 64);
  CHECK(invoke({"calibrate", "--mechanism", "cauchy"}).code == 64);
}
