#include "acdc/operators/fidelity.hpp"

#include "acdc/core/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace acdc {

DataFidelity::DataFidelity(OperatorPtr op, Signal y, double noise_std)
    : op_(std::move(op)), y_(std::move(y)), noise_std_(noise_std) {
  if (!op_) throw InvalidArgument("DataFidelity: null operator");
  if (y_.size() != op_->output_dim()) throw InvalidArgument("DataFidelity: observation length != n");
  if (!(noise_std_ > 0.0)) throw InvalidArgument("DataFidelity: noise_std must be positive");
}

double DataFidelity::loss(const Signal& x) const {
  return (y_ - op_->apply(x)).squaredNorm() / (2.0 * noise_std_ * noise_std_);
}

Signal DataFidelity::grad(const Signal& x) const {
  const Signal r = (op_->apply(x) - y_) / (noise_std_ * noise_std_);
  return op_->jacobian_transpose(x, r);
}

double DataFidelity::strong_convexity() const {
  if (!op_->is_linear() || op_->output_dim() < op_->input_dim()) return 0.0;
  const Eigen::MatrixXd a = op_->dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  // Eigenvalues at roundoff level mean a rank-deficient operator.
  const double tol = 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff());
  return lmin > tol ? lmin / (noise_std_ * noise_std_) : 0.0;
}

Signal fidelity_grad(const DataFidelity& f, const Signal& x) { return f.grad(x); }

}  // namespace acdc
