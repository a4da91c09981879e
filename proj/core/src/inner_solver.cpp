#include "acdc/operators/inner_solver.hpp"

#include "acdc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acdc {

CgResult conjugate_gradient(const std::function<Signal(const Signal&)>& apply, const Signal& b,
                            Signal x0, double tol, int max_iters) {
  CgResult res;
  res.x = std::move(x0);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }
  Signal r = b - apply(res.x);
  Signal p = r;
  double rr = r.squaredNorm();
  res.residual = std::sqrt(rr) / bnorm;
  while (res.residual > tol) {
    if (res.iterations >= max_iters)
      throw ConvergenceError("conjugate_gradient: residual " + std::to_string(res.residual) +
                                 " above tolerance after " + std::to_string(res.iterations) +
                                 " iterations",
                             res.iterations, res.residual);
    const Signal q = apply(p);
    const double alpha = rr / p.dot(q);
    res.x += alpha * p;
    r -= alpha * q;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++res.iterations;
    res.residual = std::sqrt(rr) / bnorm;
  }
  return res;
}

AdamResult adam_minimize(const std::function<double(const Signal&, Signal&)>& objective, Signal x0,
                         const InnerSolverSpec& spec) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  AdamResult res;
  Signal x = std::move(x0);
  Signal g(x.size());
  Signal m = Signal::Zero(x.size());
  Signal v = Signal::Zero(x.size());
  double loss = objective(x, g);
  res.x = x;
  res.loss = loss;
  int rising = 0;
  double b1t = 1.0, b2t = 1.0;
  for (int t = 1; t <= spec.max_iters; ++t) {
    if (spec.grad_tol > 0.0 && g.norm() <= spec.grad_tol * (1.0 + x.norm())) break;
    b1t *= beta1;
    b2t *= beta2;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const Signal mhat = m / (1.0 - b1t);
    const Signal vhat = v / (1.0 - b2t);
    x.array() -= spec.learning_rate * mhat.array() / (vhat.array().sqrt() + eps);
    const double next = objective(x, g);
    res.iterations = t;
    if (!std::isfinite(next) || !g.allFinite())
      throw DivergenceError("adam: non-finite loss at step " + std::to_string(t), t);
    if (next < res.loss) {
      res.loss = next;
      res.x = x;
    }
    rising = (next - loss > spec.delta_tol) ? rising + 1 : 0;
    loss = next;
    if (rising >= spec.patience) {
      res.early_stop = true;
      break;
    }
  }
  return res;
}

XUpdateResult solve_x_subproblem(const DataFidelity& f, const Signal& z, const Signal& u, double rho,
                                 const InnerSolverSpec& spec, const Signal* warm_start) {
  if (!(rho > 0.0)) throw InvalidArgument("solve_x_subproblem: rho must be positive");
  const ForwardOperator& op = f.op();
  const Signal target = z - u;
  XUpdateResult out;

  if (op.is_linear()) {
    const double w = 1.0 / (rho * f.noise_std() * f.noise_std());
    const Signal b = w * op.adjoint(f.observation()) + target;
    auto normal = [&](const Signal& p) -> Signal { return w * op.adjoint(op.apply(p)) + p; };
    const int limit = std::max<int>(2 * static_cast<int>(f.dim()), 20);
    CgResult cg = conjugate_gradient(normal, b, target, spec.cg_tol, limit);
    out.x = std::move(cg.x);
    out.iterations = cg.iterations;
    out.residual = cg.residual;
    return out;
  }

  auto objective = [&](const Signal& x, Signal& grad) -> double {
    const Signal diff = x - target;
    grad = f.grad(x) / rho + diff;
    return f.loss(x) / rho + 0.5 * diff.squaredNorm();
  };
  AdamResult adam = adam_minimize(objective, warm_start ? *warm_start : target, spec);
  out.x = std::move(adam.x);
  out.iterations = adam.iterations;
  Signal g(out.x.size());
  objective(out.x, g);
  out.residual = g.norm();
  return out;
}

}  // namespace acdc
