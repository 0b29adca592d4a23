#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace csflock::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kDomainError = 3,
  kSolverError = 4,
};

/// Everything a subcommand needs. Values come from an optional JSON config
/// file and are then overridden by command-line flags.
struct RunConfig {
  std::string subcommand;
  std::optional<std::size_t> n;
  std::optional<double> beta;
  std::optional<double> kappa;
  std::string order = "first";
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> v0;
  std::optional<std::vector<double>> nu;
  double t_end = 10.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  double sample_dt = 0.1;
  std::optional<std::uint64_t> seed;
  std::vector<double> kappa_grid;
  unsigned jobs = 1;
  std::optional<std::string> out_dir;
  double window_fraction = 0.5;
  std::optional<double> slope_tol;
};

/// Parses a comma-separated list of numbers. Throws ConfigError.
std::vector<double> parse_number_list(const std::string& text);

/// Applies the keys of a JSON config document to `cfg`. Unknown keys and
/// wrongly typed values raise ConfigError.
void apply_config_json(const std::string& text, RunConfig& cfg);

/// Runs the command line (without the program name). Machine-readable
/// results go to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csflock::cli
