#pragma once

#include "acdc/operators/forward_operator.hpp"

#include <optional>

namespace acdc {

/// l(y || A(x)) = ||y - A(x)||^2 / (2 sigma_n^2).
class DataFidelity {
public:
  DataFidelity(OperatorPtr op, Signal y, double noise_std);

  const ForwardOperator& op() const { return *op_; }
  const OperatorPtr& op_ptr() const { return op_; }
  const Signal& observation() const { return y_; }
  double noise_std() const { return noise_std_; }
  Index dim() const { return op_->input_dim(); }

  double loss(const Signal& x) const;
  Signal grad(const Signal& x) const;

  /// mu = lambda_min(A^T A) / sigma_n^2 for linear operators, 0 when rank deficient
  /// or nonlinear.
  double strong_convexity() const;

private:
  OperatorPtr op_;
  Signal y_;
  double noise_std_;
};

/// Gradient of the fidelity at x.
Signal fidelity_grad(const DataFidelity& f, const Signal& x);

}  // namespace acdc
