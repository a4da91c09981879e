#pragma once

#include "acdc/core/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace acdc::app {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDiverged = 3,
};

struct CommonOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;  ///< "dotted.path=value"
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int workers = 1;
};

struct SweepOptions {
  CommonOptions common;
  std::string param;
  std::vector<std::string> values;
  int seeds = 1;  ///< runs per value use seeds base, base+1, ...
};

/// Sets `path` (dot separated) in a JSON document to `value`. The value is
/// parsed as JSON when possible and kept as a string otherwise.
/// Throws ConfigError on an empty path or a non-object intermediate.
std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& overrides);

/// Reads the file, applies overrides and --seed/--out. Throws ConfigError.
ExperimentConfig load_config(const CommonOptions& options);

/// Final metrics of one solve run.
struct RunSummary {
  std::uint64_t seed = 0;
  int iterations = 0;
  double mse = 0.0;
  double psnr = 0.0;
  double final_beta = 0.0;
  int rho_increases = 0;
  double seconds = 0.0;
  std::vector<std::filesystem::path> files;
};

/// Runs one experiment and writes trace.csv and bound_report.json into `dir`.
/// Files are written only after the solver returns, through temporaries.
RunSummary solve_into(const ExperimentConfig& config, const std::filesystem::path& dir);

int cmd_solve(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_diagnose(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

/// Argument parsing and dispatch; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Applies the ACDC_LOG environment variable (trace, debug, info, warn, error, off).
void configure_logging();

std::string version_string();

}  // namespace acdc::app
