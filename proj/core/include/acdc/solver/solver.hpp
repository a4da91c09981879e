#pragma once

#include "acdc/core/config.hpp"
#include "acdc/core/random.hpp"
#include "acdc/core/schedule.hpp"
#include "acdc/denoiser/acdc_denoiser.hpp"
#include "acdc/operators/fidelity.hpp"
#include "acdc/priors/score_model.hpp"

#include <optional>
#include <vector>

namespace acdc {

/// Primal, split and scaled-dual iterates of one solve.
struct SolverState {
  Signal x;
  Signal z;
  Signal u;
  double rho = 0.0;
  int k = 0;
  double beta = 0.0;
};

struct IterationRecord {
  int k = 0;
  double sigma = 0.0;
  double sigma_s = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double primal_res = 0.0;   ///< ||x - z||
  double dual_change = 0.0;  ///< ||u - u_prev||
  double loss = 0.0;         ///< data fidelity at x
  std::optional<double> mse;  ///< of the estimate against the ground truth
  double ms = 0.0;           ///< wall time of the iteration
};

struct SolveResult {
  Signal estimate;
  SolverState state;
  std::vector<IterationRecord> trace;
  std::vector<SolverState> iterates;  ///< filled when SolverSpec::record_iterates
  int rho_increases = 0;
  int dc_condition_violations = 0;
};

/// (||dx|| + ||dz|| + ||du||) / sqrt(d).
double relative_residue(const SolverState& state, const SolverState& prev);

/// gamma * rho when beta_new >= eta * beta_old, rho otherwise.
double adapt_rho(double beta_new, double beta_old, double rho, double gamma, double eta);

DenoiserConfig denoiser_config(const SolverSpec& solver, const NoiseSchedule& schedule);

/// ADMM plug-and-play with the AC-DC denoiser in place of the z-proximal step.
///
/// Starts from x = back_project(y), z = x, u = 0 and runs K = W + tail
/// iterations of x-update, z <- D_sigma_k(x + u), u <- u + x - z. With
/// adaptive_rho the penalty follows adapt_rho from the second iteration on;
/// u is not rescaled when rho changes. Returns z as the estimate.
SolveResult admm_pnp_solve(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                           const ScoreModel& model, const Signal* truth, const RandomStream& stream);

/// Half-quadratic splitting baseline with DiffPIR-style noise mixing:
/// x <- argmin l + mu/2 ||x - z||^2, x~ <- x + zeta (x~_prev - x) + (1 - zeta) sigma n,
/// z <- D_sigma(x~). The first iteration has no x~_prev and injects pure noise;
/// sigma = 0 skips the injection entirely.
SolveResult diffpir_solve(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                          const ScoreModel& model, const Signal* truth, const RandomStream& stream);

/// SNORE gradient baseline: x <- x - delta grad l(x) - eta (x~ - D_sigma(x~)), x~ = x + sigma e.
SolveResult snore_solve(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                        const ScoreModel& model, const Signal* truth, const RandomStream& stream);

/// Dispatches on solver.method.
SolveResult run_solver(const SolverSpec& solver, const NoiseSchedule& schedule, const DataFidelity& fidelity,
                       const ScoreModel& model, const Signal* truth, const RandomStream& stream);

}  // namespace acdc
