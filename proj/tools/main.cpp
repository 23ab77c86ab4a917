#include <iostream>

#include "CLI11.hpp"
#include "lsqcolor/cli.hpp"

int main(int argc, char** argv) {
  lsqcolor::cli::RunConfig c;
  CLI::App app{"Linear model fitting under stationary colored noise"};
  app.add_option("--command", c.command, "fit | simulate | compare | mismatch-scan")->required();
  app.add_option("--data", c.data_path, "dataset CSV (t,value)");
  app.add_option("--model", c.model, "model spec: JSON file or inline JSON");
  app.add_option("--noise", c.noise, "noise spec: JSON file or inline JSON");
  app.add_option("--method", c.method, "ols | gls | gls-spectral | matched")->capture_default_str();
  app.add_option("--grid-factor", c.grid_factor, "frequency grid size per sample")
      ->capture_default_str();
  app.add_option("--pad-factor", c.pad_factor, "inverse-kernel half-width per sample")
      ->capture_default_str();
  app.add_option("--seed", c.seed)->capture_default_str();
  app.add_option("--trials", c.trials)->capture_default_str();
  app.add_option("--out", c.out_path, "output file (default: stdout)");
  app.add_option("--format", c.format, "json | csv")->capture_default_str();
  app.add_option("--perturbation", c.perturbation, "PSD perturbation spec (mismatch-scan)");
  app.add_option("--epsilons", c.epsilons, "perturbation sizes (mismatch-scan)")->delimiter(',');
  app.add_option("--workers", c.workers, "worker threads, 0 = all cores")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lsqcolor::cli::kInputError;
  }
  return lsqcolor::cli::run(c, std::cout, std::cerr);
}
