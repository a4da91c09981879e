#include "acdc/solver/problem.hpp"

#include "acdc/core/errors.hpp"

#include <Eigen/QR>

#include <cstdio>
#include <ostream>

namespace acdc {

Problem make_problem(const ExperimentConfig& config, const RandomStream& stream) {
  config.validate();
  GaussianMixturePrior prior = GaussianMixturePrior::from_spec(config.prior, config.problem.dim);
  RandomStream op_stream = stream.substream("operator");
  OperatorPtr op = make_operator(config.problem, op_stream);
  RandomStream truth_stream = stream.substream("truth");
  Signal truth = prior.sample(truth_stream);
  RandomStream meas = stream.substream("measurement");
  Signal y = op->apply(truth);
  y += config.problem.noise_std * meas.normal_vector(y.size());
  DataFidelity fidelity(std::move(op), std::move(y), config.problem.noise_std);
  return {std::move(prior), std::move(fidelity), std::move(truth)};
}

SolveResult run_experiment(const ExperimentConfig& config, const Problem& problem, const RandomStream& stream) {
  return run_solver(config.solver, config.schedule, problem.fidelity, problem.prior, &problem.truth,
                    stream.substream("solver"));
}

Signal min_norm_least_squares(const ForwardOperator& op, const Signal& y) {
  if (!op.is_linear()) throw InvalidArgument("min_norm_least_squares: operator must be linear");
  const Eigen::MatrixXd a = op.dense();
  return a.completeOrthogonalDecomposition().solve(y);
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace, bool with_timing) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.k << ',';
    put(out, r.sigma);
    out << ',';
    put(out, r.sigma_s);
    out << ',';
    put(out, r.rho);
    out << ',';
    put(out, r.beta);
    out << ',';
    put(out, r.primal_res);
    out << ',';
    put(out, r.dual_change);
    out << ',';
    put(out, r.loss);
    out << ',';
    if (r.mse) put(out, *r.mse);
    out << ',';
    if (with_timing) put(out, r.ms);
    out << '\n';
  }
}

}  // namespace acdc
