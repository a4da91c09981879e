#include "acdc/app/app.hpp"

#include "acdc/core/errors.hpp"
#include "acdc/diagnostics/bounds.hpp"
#include "acdc/priors/score_diagnostics.hpp"
#include "acdc/solver/problem.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace acdc::app {

std::string version_string() { return ACDC_VERSION_STRING; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Writes through `path.tmp` and renames, so a failed write never leaves a
// truncated file under the final name.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, [&](std::ostream& o) { o << text; });
}

/// Diameter of the region the prior puts its mass on: the largest distance
/// between two means plus three standard deviations per coordinate on each side.
double derived_diameter(const GaussianMixturePrior& prior) {
  double spread = 0.0;
  for (Index i = 0; i < prior.components(); ++i)
    for (Index j = i + 1; j < prior.components(); ++j)
      spread = std::max(spread, (prior.mean_of(i) - prior.mean_of(j)).norm());
  double s_max = 0.0;
  for (double s : prior.stds()) s_max = std::max(s_max, s);
  return spread + 6.0 * s_max * std::sqrt(static_cast<double>(prior.dim()));
}

BoundInputs bound_inputs(const ExperimentConfig& config, const GaussianMixturePrior& prior, double mu, double rho,
                         int k) {
  const SchedulePoint p = schedule_at(config.schedule, k);
  BoundInputs in;
  in.M = prior.smoothness().value_or(0.0);
  in.M_analytic = prior.components() == 1;
  in.sigma = p.sigma;
  in.sigma_s = p.sigma_s;
  in.nu = nu_at(config.schedule, std::max(k, 1));
  in.d = prior.dim();
  in.mu = mu;
  in.rho = rho;

  const double D =
      config.output.diagnostics.domain_diameter > 0.0 ? config.output.diagnostics.domain_diameter : derived_diameter(prior);
  std::vector<Signal> means;
  for (Index i = 0; i < prior.components(); ++i) means.push_back(prior.mean_of(i));
  RandomStream s = RandomStream(config.seed).substream("score_floor");
  const double S = min_score_norm(prior, s, prior_sampler(prior, 0.0), 1000, means);
  in.L = in.M * D + S;
  return in;
}

std::string summary_line(const RunSummary& s) {
  return "mse=" + fmt("%.6e", s.mse) + " psnr=" + fmt("%.3f", s.psnr) + " iterations=" + std::to_string(s.iterations) +
         " beta=" + fmt("%.3e", s.final_beta) + " rho_increases=" + std::to_string(s.rho_increases);
}

json manifest(const std::string& command, const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
              const std::vector<fs::path>& outputs, double seconds) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  json files = json::array();
  for (const auto& f : outputs)
    if (fs::exists(f) || f.filename() == "manifest.json") files.push_back(f.string());
  return json{{"command", command},
              {"version", version_string()},
              {"config_hash", hash},
              {"seeds", seeds},
              {"outputs", files},
              {"wall_clock_seconds", seconds}};
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    err << "diverged at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

std::vector<int> diagnostic_points(const ExperimentConfig& config) {
  if (!config.output.diagnostics.points.empty()) return config.output.diagnostics.points;
  const int W = config.schedule.window;
  std::vector<int> pts;
  for (int i = 0; i <= 4; ++i) {
    const int k = std::max(1, (i * W + 2) / 4);
    if (pts.empty() || pts.back() != k) pts.push_back(k);
  }
  return pts;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

// sigma^2 + sigma_s^2 >= 1/M: the bound is infinite and the check says nothing
constexpr const char* kUndefined = "SKIP (constants undefined)";

}  // namespace

RunSummary solve_into(const ExperimentConfig& config, const fs::path& dir) {
  const auto t0 = Clock::now();
  const RandomStream root(config.seed);
  const Problem problem = make_problem(config, root);
  const SolveResult res = run_experiment(config, problem, root);

  RunSummary s;
  s.seed = config.seed;
  s.iterations = static_cast<int>(res.trace.size());
  const Quality q = psnr_mse(res.estimate, problem.truth);
  s.mse = q.mse;
  s.psnr = q.psnr;
  s.final_beta = res.state.beta;
  s.rho_increases = res.rho_increases;

  const BoundReport report = make_bound_report(bound_inputs(config, problem.prior, problem.fidelity.strong_convexity(),
                                                            res.state.rho, config.schedule.max_iters()));
  fs::create_directories(dir);
  const fs::path trace = dir / "trace.csv";
  const fs::path bounds = dir / "bound_report.json";
  write_file(trace, [&](std::ostream& o) { write_trace_csv(o, res.trace, config.output.record_timing); });
  write_text(bounds, bound_report_json(report) + "\n");
  s.files = {trace, bounds};
  s.seconds = seconds_since(t0);
  return s;
}

int cmd_solve(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    const ExperimentConfig config = load_config(options);
    const fs::path dir = config.output.dir;
    spdlog::info("solve: method={} K={} seed={}", to_string(config.solver.method), config.schedule.max_iters(),
                 config.seed);
    RunSummary s = solve_into(config, dir);
    std::vector<fs::path> outputs = s.files;
    outputs.push_back(dir / "manifest.json");
    write_text(dir / "manifest.json", manifest("solve", config, {config.seed}, outputs, seconds_since(t0)).dump(2) + "\n");
    out << summary_line(s) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_diagnose(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    const ExperimentConfig config = load_config(options);
    const DiagnosticsSpec& diag = config.output.diagnostics;
    const fs::path dir = config.output.dir;
    fs::create_directories(dir);
    const RandomStream root(config.seed);
    const Problem problem = make_problem(config, root);
    const GaussianMixturePrior& prior = problem.prior;
    const RandomStream dstream = root.substream("diagnose");
    const double M = prior.smoothness().value_or(0.0);
    const DenoiserConfig dconf = denoiser_config(config.solver, config.schedule);
    std::vector<fs::path> outputs;

    const BoundReport report = make_bound_report(bound_inputs(config, prior, problem.fidelity.strong_convexity(),
                                                              config.solver.rho0, config.schedule.max_iters()));
    write_text(dir / "bound_report.json", bound_report_json(report) + "\n");
    outputs.push_back(dir / "bound_report.json");
    if (diag.bounds) {
      out << "bounds k=" << config.schedule.max_iters() << " M=" << fmt("%.6g", M)
          << " epsilon=" << fmt("%.6g", report.thm2.epsilon) << " delta=" << fmt("%.6g", report.thm2.delta)
          << " smoothing=" << (report.cond_smoothing ? "ok" : "violated")
          << " epsilon_lt_1=" << (report.cond_epsilon ? "ok" : "violated") << ' '
          << verdict(report.cond_smoothing && report.cond_epsilon) << '\n';
    }

    if (diag.smoothness) {
      const double sigma = diag.sigma.value_or(config.schedule.sigma_min);
      RandomStream s = dstream.substream("smoothness");
      const SmoothnessReport rep = empirical_smoothness(prior, sigma, diag.n_pairs, s, prior_sampler(prior, sigma));
      write_file(dir / "smoothness.csv", [&](std::ostream& o) {
        o << "pair,ratio\n";
        for (std::size_t i = 0; i < rep.ratios.size(); ++i) o << i << ',' << fmt("%.17g", rep.ratios[i]) << '\n';
      });
      outputs.push_back(dir / "smoothness.csv");
      const MtBound b = mt_bound(M, sigma);
      const auto [lo, hi] = std::minmax_element(rep.ratios.begin(), rep.ratios.end());
      out << "smoothness sigma=" << fmt("%.6g", sigma) << " empirical=" << fmt("%.9g", rep.empirical_lipschitz)
          << " bound=" << fmt("%.9g", b.value) << " ratio_min=" << fmt("%.9g", *lo)
          << " ratio_max=" << fmt("%.9g", *hi) << (b.valid ? "" : " (sigma^2 >= 1/M)") << ' '
          << verdict(rep.empirical_lipschitz <= b.value * (1.0 + 1e-3)) << '\n';
    }

    if (diag.coercivity) {
      RandomStream s = dstream.substream("coercivity");
      std::vector<Signal> base;
      for (int i = 0; i < 64; ++i) base.push_back(prior.sample(s));
      const SmoothnessReport rep = empirical_coercivity(prior, diag.coercivity_scales, base);
      write_file(dir / "coercivity.csv", [&](std::ostream& o) {
        o << "norm_sq,inner\n";
        for (const auto& [n2, ip] : rep.coercivity_samples) o << fmt("%.17g", n2) << ',' << fmt("%.17g", ip) << '\n';
      });
      outputs.push_back(dir / "coercivity.csv");
      out << "coercivity slope=" << fmt("%.6g", rep.coercivity_slope)
          << " intercept=" << fmt("%.6g", rep.coercivity_intercept) << ' ' << verdict(rep.coercivity_slope > 0.0)
          << '\n';
    }

    if (diag.nonexpansiveness || diag.boundedness) {
      const int n = std::max(diag.n_pairs, 100);
      const double L = report.inputs.L;
      for (int k : diagnostic_points(config)) {
        const SchedulePoint p = schedule_at(config.schedule, k);
        const double nu = nu_at(config.schedule, k);
        const StochasticDenoiser den = make_acdc_denoiser(prior, p, dconf);
        const std::string head = "k=" + std::to_string(k) + " sigma=" + fmt("%.6g", p.sigma) +
                                 " sigma_s=" + fmt("%.6g", p.sigma_s) + " nu=" + fmt("%.6g", nu);
        if (diag.nonexpansiveness) {
          const Theorem2Constants c = theorem2_constants(M, p.sigma, p.sigma_s, nu, prior.dim());
          RandomStream s = dstream.substream("nonexpansiveness").substream(static_cast<std::uint64_t>(k));
          const RateTest t = test_weak_nonexpansiveness(den, c.epsilon, c.delta, nu, n, prior_sampler(prior, p.sigma), s);
          out << "nonexpansiveness " << head << " rate=" << fmt("%.4f", t.violation_rate)
              << " ceiling=" << fmt("%.4g", t.ceiling) << ' ' << (c.condition_ok ? verdict(t.pass) : kUndefined)
              << '\n';
        }
        if (diag.boundedness) {
          const Theorem3Bound b = theorem3_ck(M, p.sigma, p.sigma_s, nu, L);
          RandomStream s = dstream.substream("boundedness").substream(static_cast<std::uint64_t>(k));
          const RateTest t =
              test_boundedness(den, std::sqrt(b.c_conservative), nu, n, prior_sampler(prior, p.sigma), s);
          out << "boundedness " << head << " rate=" << fmt("%.4f", t.violation_rate)
              << " ceiling=" << fmt("%.4g", t.ceiling) << ' ' << (b.condition_ok ? verdict(t.pass) : kUndefined)
              << '\n';
        }
      }
    }

    outputs.push_back(dir / "manifest.json");
    write_text(dir / "manifest.json",
               manifest("diagnose", config, {config.seed}, outputs, seconds_since(t0)).dump(2) + "\n");
    return static_cast<int>(kOk);
  });
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = Clock::now();
    if (options.param.empty()) throw ConfigError("sweep: --param is required");
    if (options.values.empty()) throw ConfigError("sweep: --values is empty");
    if (options.seeds < 1) throw ConfigError("sweep: --seeds must be >= 1");

    const ExperimentConfig base = load_config(options.common);
    const fs::path root = base.output.dir;

    struct Run {
      std::size_t value;
      std::uint64_t seed;
      ExperimentConfig config;
      fs::path dir;
      std::string status = "pending";
      RunSummary summary;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < options.values.size(); ++i) {
      CommonOptions o = options.common;
      o.overrides.push_back(options.param + "=" + options.values[i]);
      for (int j = 0; j < options.seeds; ++j) {
        o.seed = base.seed + static_cast<std::uint64_t>(j);
        Run r{i, *o.seed, load_config(o), {}, "pending", {}};
        r.dir = root / ("v" + std::to_string(i)) / ("seed_" + std::to_string(r.seed));
        r.config.output.dir = r.dir.string();
        runs.push_back(std::move(r));
      }
    }

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
      for (std::size_t idx = next++; idx < runs.size(); idx = next++) {
        Run& r = runs[idx];
        try {
          r.summary = solve_into(r.config, r.dir);
          r.status = "ok";
        } catch (const DivergenceError& e) {
          r.status = "diverged";
          std::lock_guard lock(log_mutex);
          spdlog::warn("sweep run {}={} seed {} diverged: {}", options.param, options.values[r.value], r.seed, e.what());
        } catch (const std::exception& e) {
          r.status = "error";
          std::lock_guard lock(log_mutex);
          spdlog::warn("sweep run {}={} seed {} failed: {}", options.param, options.values[r.value], r.seed, e.what());
        }
      }
    };
    const int n_workers = std::clamp(options.common.workers, 1, static_cast<int>(runs.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(root);
    std::vector<fs::path> outputs;
    std::vector<std::uint64_t> seeds;
    for (int j = 0; j < options.seeds; ++j) seeds.push_back(base.seed + static_cast<std::uint64_t>(j));

    write_file(root / "runs.csv", [&](std::ostream& o) {
      o << "param,value,seed,status,iterations,mse,psnr,dir\n";
      for (const auto& r : runs) {
        o << options.param << ',' << options.values[r.value] << ',' << r.seed << ',' << r.status << ',';
        if (r.status == "ok")
          o << r.summary.iterations << ',' << fmt("%.17g", r.summary.mse) << ',' << fmt("%.17g", r.summary.psnr);
        else
          o << ",,";
        o << ',' << r.dir.string() << '\n';
      }
    });
    write_file(root / "aggregate.csv", [&](std::ostream& o) {
      o << "param,value,runs,failed,mse_mean,mse_std,psnr_mean,psnr_std\n";
      for (std::size_t i = 0; i < options.values.size(); ++i) {
        std::vector<double> mse, psnr;
        int failed = 0;
        for (const auto& r : runs) {
          if (r.value != i) continue;
          if (r.status != "ok") {
            ++failed;
            continue;
          }
          mse.push_back(r.summary.mse);
          psnr.push_back(r.summary.psnr);
        }
        auto stats = [](const std::vector<double>& v) {
          if (v.empty()) return std::pair<std::string, std::string>{"", ""};
          double m = 0.0;
          for (double x : v) m += x;
          m /= static_cast<double>(v.size());
          double ss = 0.0;
          for (double x : v) ss += (x - m) * (x - m);
          const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
          return std::pair{fmt("%.17g", m), fmt("%.17g", sd)};
        };
        const auto [mm, ms] = stats(mse);
        const auto [pm, ps] = stats(psnr);
        o << options.param << ',' << options.values[i] << ',' << (mse.size() + failed) << ',' << failed << ',' << mm
          << ',' << ms << ',' << pm << ',' << ps << '\n';
      }
    });
    outputs.push_back(root / "runs.csv");
    outputs.push_back(root / "aggregate.csv");
    for (const auto& r : runs)
      for (const auto& f : r.summary.files) outputs.push_back(f);
    outputs.push_back(root / "manifest.json");

    json m = manifest("sweep", base, seeds, outputs, seconds_since(t0));
    m["param"] = options.param;
    m["values"] = options.values;
    m["workers"] = n_workers;
    json rj = json::array();
    for (const auto& r : runs)
      rj.push_back({{"value", options.values[r.value]},
                    {"seed", r.seed},
                    {"status", r.status},
                    {"dir", r.dir.string()},
                    {"seconds", r.summary.seconds}});
    m["runs"] = rj;
    write_text(root / "manifest.json", m.dump(2) + "\n");

    const auto ok = std::count_if(runs.begin(), runs.end(), [](const Run& r) { return r.status == "ok"; });
    out << "sweep " << options.param << ": " << ok << "/" << runs.size() << " runs ok, aggregate at "
        << (root / "aggregate.csv").string() << '\n';
    if (ok > 0) return static_cast<int>(kOk);
    const bool all_diverged =
        std::all_of(runs.begin(), runs.end(), [](const Run& r) { return r.status == "diverged"; });
    return static_cast<int>(all_diverged ? kDiverged : kFailure);
  });
}

}  // namespace acdc::app
