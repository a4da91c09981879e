#pragma once

#include "acdc/core/config.hpp"
#include "acdc/core/random.hpp"
#include "acdc/core/signal.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace acdc {

/// Measurement operator A : R^d -> R^n.
class ForwardOperator {
public:
  virtual ~ForwardOperator() = default;

  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;
  virtual bool is_linear() const = 0;
  virtual std::string name() const = 0;

  virtual Signal apply(const Signal& x) const = 0;

  /// A^T y. Only linear operators implement it; the rest throw InvalidArgument.
  virtual Signal adjoint(const Signal& y) const;

  /// J_A(x)^T r, the vector-Jacobian product used for data-fidelity gradients.
  /// Equals adjoint(r) for linear operators.
  virtual Signal jacobian_transpose(const Signal& x, const Signal& r) const;

  /// Measurement-informed starting point: A^T y for linear operators.
  virtual Signal back_project(const Signal& y) const;

  /// Dense matrix of a linear operator, built column by column from apply().
  Eigen::MatrixXd dense() const;
};

using OperatorPtr = std::shared_ptr<const ForwardOperator>;

class IdentityOperator final : public ForwardOperator {
public:
  explicit IdentityOperator(Index d) : d_(d) {}
  Index input_dim() const override { return d_; }
  Index output_dim() const override { return d_; }
  bool is_linear() const override { return true; }
  std::string name() const override { return "identity"; }
  Signal apply(const Signal& x) const override { return x; }
  Signal adjoint(const Signal& y) const override { return y; }

private:
  Index d_;
};

/// Diagonal 0/1 mask; dropped entries are zeroed, output length stays d.
class MaskOperator final : public ForwardOperator {
public:
  explicit MaskOperator(Eigen::VectorXd keep, std::string label = "mask");

  static MaskOperator random(Index d, double keep_fraction, RandomStream& stream);
  static MaskOperator box(Index d, Index start, Index length);

  Index input_dim() const override { return keep_.size(); }
  Index output_dim() const override { return keep_.size(); }
  bool is_linear() const override { return true; }
  std::string name() const override { return label_; }
  Signal apply(const Signal& x) const override { return keep_.cwiseProduct(x); }
  Signal adjoint(const Signal& y) const override { return keep_.cwiseProduct(y); }

  const Eigen::VectorXd& keep() const { return keep_; }
  Index kept() const;

private:
  Eigen::VectorXd keep_;
  std::string label_;
};

/// Circular convolution on a height x width grid (height 1 for 1-D signals).
/// The kernel is centred: tap (kr/2, kc/2) multiplies the output pixel itself.
class ConvolutionOperator final : public ForwardOperator {
public:
  ConvolutionOperator(Index height, Index width, Eigen::MatrixXd kernel);

  Index input_dim() const override { return height_ * width_; }
  Index output_dim() const override { return height_ * width_; }
  bool is_linear() const override { return true; }
  std::string name() const override { return "convolution"; }
  Signal apply(const Signal& x) const override;
  Signal adjoint(const Signal& y) const override;

  const Eigen::MatrixXd& kernel() const { return kernel_; }

private:
  Signal correlate(const Signal& x, bool flip) const;

  Index height_;
  Index width_;
  Eigen::MatrixXd kernel_;
};

/// Block averaging over `factor` consecutive samples followed by subsampling.
class DecimationOperator final : public ForwardOperator {
public:
  DecimationOperator(Index d, Index factor);

  Index input_dim() const override { return d_; }
  Index output_dim() const override { return d_ / factor_; }
  bool is_linear() const override { return true; }
  std::string name() const override { return "decimation"; }
  Signal apply(const Signal& x) const override;
  Signal adjoint(const Signal& y) const override;

private:
  Index d_;
  Index factor_;
};

class MatrixOperator final : public ForwardOperator {
public:
  explicit MatrixOperator(Eigen::MatrixXd a, std::string label = "matrix")
      : a_(std::move(a)), label_(std::move(label)) {}

  /// n x d matrix with i.i.d. N(0, 1/n) entries.
  static MatrixOperator gaussian(Index n, Index d, RandomStream& stream);

  Index input_dim() const override { return a_.cols(); }
  Index output_dim() const override { return a_.rows(); }
  bool is_linear() const override { return true; }
  std::string name() const override { return label_; }
  Signal apply(const Signal& x) const override { return a_ * x; }
  Signal adjoint(const Signal& y) const override { return a_.transpose() * y; }

  const Eigen::MatrixXd& matrix() const { return a_; }

private:
  Eigen::MatrixXd a_;
  std::string label_;
};

/// clip(c x, 0, 1).
class HdrOperator final : public ForwardOperator {
public:
  HdrOperator(Index d, double scale) : d_(d), scale_(scale) {}

  Index input_dim() const override { return d_; }
  Index output_dim() const override { return d_; }
  bool is_linear() const override { return false; }
  std::string name() const override { return "hdr"; }
  Signal apply(const Signal& x) const override;
  /// Pass-through on the unclipped set, zero where the clip is active.
  Signal jacobian_transpose(const Signal& x, const Signal& r) const override;
  Signal back_project(const Signal& y) const override { return y / scale_; }

  double scale() const { return scale_; }

private:
  Index d_;
  double scale_;
};

/// |F pad(x)| / sqrt(oversampling) with pad() zero-padding to length
/// oversampling * d and F the unnormalised DFT.
///
/// With this normalisation a constant signal c maps to c d / sqrt(oversampling)
/// at frequency 0; the remaining even bins vanish and the odd bins carry the
/// spectrum of the zero-padded box.
class PhaseRetrievalOperator final : public ForwardOperator {
public:
  PhaseRetrievalOperator(Index d, Index oversampling);

  Index input_dim() const override { return d_; }
  Index output_dim() const override { return n_; }
  bool is_linear() const override { return false; }
  std::string name() const override { return "phase_retrieval"; }
  Signal apply(const Signal& x) const override;
  /// Gradient through the smoothed magnitude sqrt(|X|^2 + 1e-12).
  Signal jacobian_transpose(const Signal& x, const Signal& r) const override;
  /// Zero-phase inverse transform of the magnitudes, truncated to d samples.
  Signal back_project(const Signal& y) const override;

  /// Smoothed magnitudes, i.e. what the fidelity gradient differentiates.
  Signal smoothed_magnitude(const Signal& x) const;

private:
  void transform(const Signal& x, Eigen::VectorXd& re, Eigen::VectorXd& im) const;

  Index d_;
  Index n_;
  double norm_;
  Eigen::MatrixXd cos_;  ///< n x d
  Eigen::MatrixXd sin_;
};

inline constexpr double kMagnitudeSmoothing = 1e-12;

/// Normalised 1-D kernels.
Eigen::VectorXd gaussian_kernel(int taps, double std);
/// One-sided exponentially decaying smear standing in for a motion blur.
Eigen::VectorXd motion_kernel(int taps);

/// Builds the operator described by `spec`. Random operators draw from `stream`.
OperatorPtr make_operator(const ProblemSpec& spec, RandomStream& stream);

}  // namespace acdc
