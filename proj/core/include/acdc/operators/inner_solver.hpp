#pragma once

#include "acdc/core/config.hpp"
#include "acdc/operators/fidelity.hpp"

#include <functional>

namespace acdc {

struct CgResult {
  Signal x;
  int iterations = 0;
  double residual = 0.0;  ///< ||b - M x|| / ||b||
};

/// Conjugate gradients for a symmetric positive definite operator.
/// Throws ConvergenceError when `max_iters` is reached above `tol`.
CgResult conjugate_gradient(const std::function<Signal(const Signal&)>& apply, const Signal& b,
                            Signal x0, double tol, int max_iters);

struct AdamResult {
  Signal x;
  int iterations = 0;
  double loss = 0.0;
  bool early_stop = false;
};

/// Adam on `objective`, returning the lowest-loss iterate seen. Stops after
/// `spec.patience` consecutive steps whose loss rose by more than
/// `spec.delta_tol`, or when the gradient norm drops below `spec.grad_tol`.
AdamResult adam_minimize(const std::function<double(const Signal&, Signal&)>& objective, Signal x0,
                         const InnerSolverSpec& spec);

struct XUpdateResult {
  Signal x;
  int iterations = 0;
  double residual = 0.0;
};

/// argmin_x (1/rho) l(y || A(x)) + 1/2 ||x - z + u||^2.
///
/// Linear operators: CG on (A^T A / (rho sigma_n^2) + I) x = A^T y / (rho sigma_n^2) + z - u,
/// started at z - u, to a relative residual of spec.cg_tol within max(2d, 20) iterations.
/// Nonlinear operators: Adam started at `warm_start` (z - u when empty).
XUpdateResult solve_x_subproblem(const DataFidelity& f, const Signal& z, const Signal& u, double rho,
                                 const InnerSolverSpec& spec, const Signal* warm_start = nullptr);

}  // namespace acdc
