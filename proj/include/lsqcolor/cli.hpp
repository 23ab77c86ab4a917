#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lsqcolor::cli {

struct RunConfig {
  std::string command;  ///< fit | simulate | compare | mismatch-scan
  std::string data_path;
  std::string model;  ///< path or inline JSON
  std::string noise;  ///< path or inline JSON
  std::string method = "ols";  ///< ols | gls | gls-spectral | matched
  double grid_factor = 8.0;
  double pad_factor = 4.0;
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::string out_path;  ///< empty: standard output
  std::string format = "json";  ///< json | csv
  std::string perturbation;  ///< mismatch-scan only
  std::vector<double> epsilons{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  unsigned workers = 0;  ///< 0: hardware concurrency
};

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3 };

/// Validates the config and runs the command. Errors are reported on `err`
/// and turned into the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_fit(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_compare(const RunConfig& config, std::ostream& out);
int cmd_mismatch_scan(const RunConfig& config, std::ostream& out);

}  // namespace lsqcolor::cli
