#include "acdc/app/app.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <ostream>

namespace acdc::app {

void configure_logging() {
  static bool done = false;
  if (!done) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("acdc"));
    done = true;
  }
  const char* env = std::getenv("ACDC_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

namespace {

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON experiment config")->required();
  cmd->add_option("--override", o.overrides, "dotted.path=value, repeatable");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "concurrent runs (sweep)")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"ADMM plug-and-play with the AC-DC score denoiser", "acdc"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  CommonOptions solve_opts, diag_opts;
  SweepOptions sweep_opts;
  auto* solve = app.add_subcommand("solve", "run one experiment");
  add_common(solve, solve_opts);
  auto* diagnose = app.add_subcommand("diagnose", "empirical checks of the theorem assumptions");
  add_common(diagnose, diag_opts);
  auto* sweep = app.add_subcommand("sweep", "one run per (value, seed) with aggregated metrics");
  add_common(sweep, sweep_opts.common);
  sweep->add_option("--param", sweep_opts.param, "dotted config path")->required();
  sweep->add_option("--values", sweep_opts.values, "comma separated values")->required()->delimiter(',');
  sweep->add_option("--seeds", sweep_opts.seeds, "runs per value")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  if (solve->parsed()) return cmd_solve(solve_opts, out, err);
  if (diagnose->parsed()) return cmd_diagnose(diag_opts, out, err);
  return cmd_sweep(sweep_opts, out, err);
}

}  // namespace acdc::app
