#pragma once

#include "acdc/core/config.hpp"
#include "acdc/core/random.hpp"
#include "acdc/operators/fidelity.hpp"
#include "acdc/priors/gmm.hpp"
#include "acdc/solver/solver.hpp"

#include <iosfwd>
#include <string_view>

namespace acdc {

/// A synthetic inverse problem: truth drawn from the prior, y = A(truth) + sigma_n n.
struct Problem {
  GaussianMixturePrior prior;
  DataFidelity fidelity;
  Signal truth;
};

/// Operator, truth and measurement noise use the "operator", "truth" and
/// "measurement" substreams of `stream`; the solver gets "solver".
Problem make_problem(const ExperimentConfig& config, const RandomStream& stream);

/// Full experiment: make_problem then run_solver.
SolveResult run_experiment(const ExperimentConfig& config, const Problem& problem, const RandomStream& stream);

/// A^+ y through a complete orthogonal decomposition of the dense operator.
Signal min_norm_least_squares(const ForwardOperator& op, const Signal& y);

inline constexpr std::string_view kTraceHeader = "k,sigma,sigma_s,rho,beta,primal_res,dual_change,loss,mse,ms";

/// One row per record. `mse` is empty when unknown, `ms` when timing is off.
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace, bool with_timing);

}  // namespace acdc
