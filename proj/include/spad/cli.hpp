#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace spad::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kIoError = 2, kUsage = 64 };

/// Reference values for the three-dimension worked example.
struct ExampleConstants {
  double uniform_dh = 0.530;
  double uniform_trh = 4.191;
  double uniform_bw = 3.308;
  std::array<double, 3> welfare_m{0.375, 0.049, 0.049};
  double welfare_trh = 3.966;
  double welfare_bw = 2.742;
  double tolerance = 5e-3;
};

/// Evaluates the uniform and welfare-aware policies of the worked example,
/// prints a comparison table and returns kOk iff every reference value is
/// matched within the tolerance.
int run_example(const ExampleConstants& expected, std::ostream& out);

/// Full command-line entry point (subcommands example, solve, spad, sweep,
/// verify, calibrate).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace spad::cli
