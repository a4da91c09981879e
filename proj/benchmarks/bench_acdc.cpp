#include "acdc/denoiser/acdc_denoiser.hpp"
#include "acdc/operators/inner_solver.hpp"
#include "acdc/solver/problem.hpp"

#include <benchmark/benchmark.h>

using namespace acdc;

namespace {

ExperimentConfig cs_config(int d) {
  ExperimentConfig c;
  c.problem.kind = OperatorKind::GaussianProjection;
  c.problem.dim = d;
  c.problem.measurements = d / 2;
  c.prior.weights = {0.5, 0.5};
  c.prior.means = {std::vector<double>(static_cast<std::size_t>(d), 1.0),
                   std::vector<double>(static_cast<std::size_t>(d), -1.0)};
  c.prior.stds = {0.5, 0.5};
  return c;
}

}  // namespace

static void BM_AcdcDenoise(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Problem p = make_problem(cs_config(d), RandomStream(1));
  DenoiserConfig cfg;
  cfg.dc_steps = static_cast<int>(state.range(1));
  const SchedulePoint pt{0.5, 0.1, 2.5e-4};
  RandomStream root(2);
  DenoiserStreams streams = DenoiserStreams::from(root);
  const Signal z = p.truth + 0.3 * root.normal_vector(d);
  for (auto _ : state) benchmark::DoNotOptimize(acdc_denoise(z, p.prior, pt, cfg, streams).z);
}
BENCHMARK(BM_AcdcDenoise)->Args({16, 0})->Args({16, 10})->Args({64, 10})->Args({256, 10});

static void BM_OdeDenoise(benchmark::State& state) {
  const Problem p = make_problem(cs_config(64), RandomStream(1));
  const Signal z = p.truth;
  for (auto _ : state) benchmark::DoNotOptimize(ode_denoise(z, p.prior, 1.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_OdeDenoise)->Arg(10)->Arg(100);

static void BM_XUpdateCg(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Problem p = make_problem(cs_config(d), RandomStream(3));
  const Signal z = Signal::Zero(d), u = Signal::Zero(d);
  InnerSolverSpec inner;
  for (auto _ : state) benchmark::DoNotOptimize(solve_x_subproblem(p.fidelity, z, u, 100.0, inner).x);
}
BENCHMARK(BM_XUpdateCg)->Arg(16)->Arg(64)->Arg(256);

static void BM_AdmmIteration(benchmark::State& state) {
  ExperimentConfig c = cs_config(static_cast<int>(state.range(0)));
  c.schedule.window = 1;
  c.schedule.tail = 0;
  const RandomStream st(4);
  const Problem p = make_problem(c, st);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, p, st).estimate);
}
BENCHMARK(BM_AdmmIteration)->Arg(16)->Arg(64);
BENCHMARK_MAIN();
