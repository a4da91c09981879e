#include "acdc/solver/solver.hpp"

#include "acdc/core/errors.hpp"
#include "acdc/operators/inner_solver.hpp"

#include <chrono>
#include <cmath>

namespace acdc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::optional<double> mse_of(const Signal& est, const Signal* truth) {
  if (!truth) return std::nullopt;
  return (est - *truth).squaredNorm() / static_cast<double>(est.size());
}

/// Re-throws inner failures with the outer iteration attached.
template <class F>
auto with_iteration(int k, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(e.what()) + " [iteration " + std::to_string(k) + "]", e.step(), k);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(e.what()) + " [iteration " + std::to_string(k) + "]", e.iterations(),
                           e.residual());
  }
}

SolverState initial_state(const DataFidelity& f, double rho) {
  SolverState s;
  s.x = f.op().back_project(f.observation());
  s.z = s.x;
  s.u = Signal::Zero(s.x.size());
  s.rho = rho;
  return s;
}

void check_inputs(const NoiseSchedule& schedule, const DataFidelity& f, const ScoreModel& model,
                  const Signal* truth) {
  schedule.validate();
  if (model.dim() != f.dim()) throw InvalidArgument("solver: prior and operator dimensions differ");
  if (truth && truth->size() != f.dim()) throw InvalidArgument("solver: truth has the wrong length");
}

}  // namespace

double relative_residue(const SolverState& state, const SolverState& prev) {
  if (state.x.size() != prev.x.size() || state.z.size() != prev.z.size() || state.u.size() != prev.u.size())
    throw InvalidArgument("relative_residue: dimension mismatch");
  const double d = static_cast<double>(state.x.size());
  return ((state.x - prev.x).norm() + (state.z - prev.z).norm() + (state.u - prev.u).norm()) / std::sqrt(d);
}

double adapt_rho(double beta_new, double beta_old, double rho, double gamma, double eta) {
  return beta_new >= eta * beta_old ? gamma * rho : rho;
}

DenoiserConfig denoiser_config(const SolverSpec& solver, const NoiseSchedule& schedule) {
  DenoiserConfig dc;
  dc.dc_steps = schedule.dc_steps;
  dc.zero_noise = solver.zero_noise;
  dc.backend = solver.backend;
  dc.ode_steps = solver.ode_steps;
  dc.ode_integrator = solver.ode_integrator;
  return dc;
}

SolveResult admm_pnp_solve(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                           const ScoreModel& model, const Signal* truth, const RandomStream& stream) {
  check_inputs(schedule, fidelity, model, truth);
  if (!(solver.rho0 > 0.0)) throw InvalidArgument("admm: rho0 must be positive");
  if (solver.adaptive_rho && (!(solver.gamma_rho > 1.0) || solver.eta_beta < 0.0 || solver.eta_beta >= 1.0))
    throw InvalidArgument("admm: adaptive rho needs gamma_rho > 1 and eta_beta in [0, 1)");

  const DenoiserConfig dconf = denoiser_config(solver, schedule);
  DenoiserStreams streams = DenoiserStreams::from(stream.substream("denoiser"));
  const bool nonlinear = !fidelity.op().is_linear();

  SolveResult res;
  SolverState state = initial_state(fidelity, solver.rho0);
  const int K = schedule.max_iters();
  res.trace.reserve(static_cast<std::size_t>(K));
  double beta_prev = 0.0;

  for (int k = 0; k < K; ++k) {
    const auto t0 = Clock::now();
    const SchedulePoint point = schedule_at(schedule, k);
    const SolverState prev = state;

    const XUpdateResult xr = with_iteration(k, [&] {
      return solve_x_subproblem(fidelity, state.z, state.u, state.rho, solver.inner,
                                nonlinear ? &prev.x : nullptr);
    });
    state.x = xr.x;
    const Signal z_tilde = state.x + state.u;
    DenoiseResult dn = with_iteration(k, [&] { return acdc_denoise(z_tilde, model, point, dconf, streams); });
    if (!dn.trace.dc_condition_ok) ++res.dc_condition_violations;
    state.z = std::move(dn.z);
    state.u = prev.u + (state.x - state.z);
    state.k = k;
    state.beta = relative_residue(state, prev);
    require_finite(state.u, "admm dual update", -1, k);

    IterationRecord rec;
    rec.k = k;
    rec.sigma = point.sigma;
    rec.sigma_s = point.sigma_s;
    rec.rho = state.rho;
    rec.beta = state.beta;
    rec.primal_res = (state.x - state.z).norm();
    rec.dual_change = (state.u - prev.u).norm();
    rec.loss = fidelity.loss(state.x);
    rec.mse = mse_of(state.z, truth);

    if (solver.record_iterates) res.iterates.push_back(state);
    if (solver.adaptive_rho && k >= 1) {
      const double next = adapt_rho(state.beta, beta_prev, state.rho, solver.gamma_rho, solver.eta_beta);
      if (next > state.rho) ++res.rho_increases;
      state.rho = next;
    }
    beta_prev = state.beta;
    rec.ms = elapsed_ms(t0);
    res.trace.push_back(rec);
  }

  res.estimate = state.z;
  res.state = std::move(state);
  return res;
}

SolveResult diffpir_solve(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                          const ScoreModel& model, const Signal* truth, const RandomStream& stream) {
  check_inputs(schedule, fidelity, model, truth);
  const double mu = solver.mu_hqs > 0.0 ? solver.mu_hqs : solver.rho0;
  if (!(mu > 0.0)) throw InvalidArgument("diffpir: coupling weight must be positive");
  RandomStream noise = stream.substream("diffpir");
  const bool nonlinear = !fidelity.op().is_linear();

  SolveResult res;
  SolverState state = initial_state(fidelity, mu);
  const Signal zero = Signal::Zero(state.x.size());
  std::optional<Signal> x_tilde_prev;
  const int K = schedule.max_iters();

  for (int k = 0; k < K; ++k) {
    const auto t0 = Clock::now();
    const SchedulePoint point = schedule_at(schedule, k);
    const SolverState prev = state;

    state.x = with_iteration(k, [&] {
      return solve_x_subproblem(fidelity, state.z, zero, mu, solver.inner, nonlinear ? &prev.x : nullptr).x;
    });

    Signal x_tilde = state.x;
    if (point.sigma > 0.0) {
      const Signal n = solver.zero_noise ? Signal(zero) : noise.normal_vector(state.x.size());
      if (x_tilde_prev)
        x_tilde += solver.zeta * (*x_tilde_prev - state.x) + (1.0 - solver.zeta) * point.sigma * n;
      else
        x_tilde += point.sigma * n;
    }
    x_tilde_prev = x_tilde;

    state.z = with_iteration(k, [&] {
      return solver.backend == DenoiserBackend::Tweedie
                 ? tweedie_denoise(x_tilde, model, point.sigma)
                 : ode_denoise(x_tilde, model, point.sigma, solver.ode_steps, solver.ode_integrator);
    });
    require_finite(state.z, "diffpir denoise", -1, k);
    state.k = k;
    state.beta = relative_residue(state, prev);

    IterationRecord rec;
    rec.k = k;
    rec.sigma = point.sigma;
    rec.sigma_s = point.sigma_s;
    rec.rho = mu;
    rec.beta = state.beta;
    rec.primal_res = (state.x - state.z).norm();
    rec.dual_change = 0.0;
    rec.loss = fidelity.loss(state.x);
    rec.mse = mse_of(state.z, truth);
    if (solver.record_iterates) res.iterates.push_back(state);
    rec.ms = elapsed_ms(t0);
    res.trace.push_back(rec);
  }
  res.estimate = state.z;
  res.state = std::move(state);
  return res;
}

SolveResult snore_solve(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                        const ScoreModel& model, const Signal* truth, const RandomStream& stream) {
  check_inputs(schedule, fidelity, model, truth);
  if (!(solver.snore_step > 0.0) || !(solver.snore_reg > 0.0))
    throw InvalidArgument("snore: step sizes must be positive");
  RandomStream noise = stream.substream("snore");

  SolveResult res;
  SolverState state = initial_state(fidelity, solver.rho0);
  const int K = schedule.max_iters();

  for (int k = 0; k < K; ++k) {
    const auto t0 = Clock::now();
    const SchedulePoint point = schedule_at(schedule, k);
    const SolverState prev = state;

    Signal x_tilde = state.x;
    if (!solver.zero_noise && point.sigma > 0.0) x_tilde += point.sigma * noise.normal_vector(state.x.size());
    const Signal denoised = tweedie_denoise(x_tilde, model, point.sigma);
    state.x = prev.x - solver.snore_step * fidelity.grad(prev.x) - solver.snore_reg * (x_tilde - denoised);
    require_finite(state.x, "snore update", -1, k);
    state.z = denoised;
    state.k = k;
    state.beta = relative_residue(state, prev);

    IterationRecord rec;
    rec.k = k;
    rec.sigma = point.sigma;
    rec.sigma_s = point.sigma_s;
    rec.rho = state.rho;
    rec.beta = state.beta;
    rec.primal_res = (state.x - state.z).norm();
    rec.dual_change = 0.0;
    rec.loss = fidelity.loss(state.x);
    rec.mse = mse_of(state.x, truth);
    if (solver.record_iterates) res.iterates.push_back(state);
    rec.ms = elapsed_ms(t0);
    res.trace.push_back(rec);
  }
  res.estimate = state.x;
  res.state = std::move(state);
  return res;
}

SolveResult run_solver(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                       const ScoreModel& model, const Signal* truth, const RandomStream& stream) {
  switch (solver.method) {
    case SolverMethod::Admm:
      return admm_pnp_solve(solver, schedule, fidelity, model, truth, stream);
    case SolverMethod::DiffPir:
      return diffpir_solve(solver, schedule, fidelity, model, truth, stream);
    case SolverMethod::Snore:
      return snore_solve(solver, schedule, fidelity, model, truth, stream);
  }
  throw InvalidArgument("run_solver: unknown method");
}

}  // namespace acdc
