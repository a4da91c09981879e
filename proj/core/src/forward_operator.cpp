#include "acdc/operators/forward_operator.hpp"

#include "acdc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acdc {

Signal ForwardOperator::adjoint(const Signal&) const {
  throw InvalidArgument(name() + ": adjoint is only defined for linear operators");
}

Signal ForwardOperator::jacobian_transpose(const Signal&, const Signal& r) const { return adjoint(r); }

Signal ForwardOperator::back_project(const Signal& y) const { return adjoint(y); }

Eigen::MatrixXd ForwardOperator::dense() const {
  if (!is_linear()) throw InvalidArgument(name() + ": dense() requires a linear operator");
  Eigen::MatrixXd a(output_dim(), input_dim());
  Signal e = Signal::Zero(input_dim());
  for (Index j = 0; j < input_dim(); ++j) {
    e[j] = 1.0;
    a.col(j) = apply(e);
    e[j] = 0.0;
  }
  return a;
}

// ---------------------------------------------------------------------------

MaskOperator::MaskOperator(Eigen::VectorXd keep, std::string label)
    : keep_(std::move(keep)), label_(std::move(label)) {
  if (keep_.size() < 1) throw InvalidArgument("mask: empty signal");
}

MaskOperator MaskOperator::random(Index d, double keep_fraction, RandomStream& stream) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0)
    throw InvalidArgument("random mask: keep fraction must lie in (0, 1]");
  Eigen::VectorXd keep(d);
  for (Index i = 0; i < d; ++i) keep[i] = stream.uniform() < keep_fraction ? 1.0 : 0.0;
  return MaskOperator(std::move(keep), "random_mask");
}

MaskOperator MaskOperator::box(Index d, Index start, Index length) {
  if (start < 0 || length < 0 || start + length > d)
    throw InvalidArgument("box mask: block outside the signal");
  Eigen::VectorXd keep = Eigen::VectorXd::Ones(d);
  keep.segment(start, length).setZero();
  return MaskOperator(std::move(keep), "box_mask");
}

Index MaskOperator::kept() const { return static_cast<Index>(keep_.sum()); }

// ---------------------------------------------------------------------------

ConvolutionOperator::ConvolutionOperator(Index height, Index width, Eigen::MatrixXd kernel)
    : height_(height), width_(width), kernel_(std::move(kernel)) {
  if (height_ < 1 || width_ < 1) throw InvalidArgument("convolution: empty grid");
  if (kernel_.size() == 0) throw InvalidArgument("convolution: empty kernel");
}

Signal ConvolutionOperator::correlate(const Signal& x, bool flip) const {
  const Index kr = kernel_.rows();
  const Index kc = kernel_.cols();
  const Index cr = kr / 2;
  const Index cc = kc / 2;
  auto wrap = [](Index i, Index n) { return ((i % n) + n) % n; };
  Signal out = Signal::Zero(x.size());
  for (Index i = 0; i < height_; ++i) {
    for (Index j = 0; j < width_; ++j) {
      double acc = 0.0;
      for (Index a = 0; a < kr; ++a) {
        for (Index b = 0; b < kc; ++b) {
          // Convolution reads x[i - (a - cr)], its adjoint reads x[i + (a - cr)].
          const Index si = flip ? wrap(i + (a - cr), height_) : wrap(i - (a - cr), height_);
          const Index sj = flip ? wrap(j + (b - cc), width_) : wrap(j - (b - cc), width_);
          acc += kernel_(a, b) * x[si * width_ + sj];
        }
      }
      out[i * width_ + j] = acc;
    }
  }
  return out;
}

Signal ConvolutionOperator::apply(const Signal& x) const { return correlate(x, false); }
Signal ConvolutionOperator::adjoint(const Signal& y) const { return correlate(y, true); }

// ---------------------------------------------------------------------------

DecimationOperator::DecimationOperator(Index d, Index factor) : d_(d), factor_(factor) {
  if (factor_ < 1 || d_ % factor_ != 0) throw InvalidArgument("decimation: factor must divide d");
}

Signal DecimationOperator::apply(const Signal& x) const {
  Signal y(d_ / factor_);
  for (Index i = 0; i < y.size(); ++i) y[i] = x.segment(i * factor_, factor_).mean();
  return y;
}

Signal DecimationOperator::adjoint(const Signal& y) const {
  Signal x(d_);
  for (Index i = 0; i < y.size(); ++i) x.segment(i * factor_, factor_).setConstant(y[i] / factor_);
  return x;
}

// ---------------------------------------------------------------------------

MatrixOperator MatrixOperator::gaussian(Index n, Index d, RandomStream& stream) {
  Eigen::MatrixXd a(n, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = scale * stream.normal();
  return MatrixOperator(std::move(a), "gaussian_projection");
}

// ---------------------------------------------------------------------------

Signal HdrOperator::apply(const Signal& x) const { return (scale_ * x).cwiseMax(0.0).cwiseMin(1.0); }

Signal HdrOperator::jacobian_transpose(const Signal& x, const Signal& r) const {
  Signal out(d_);
  for (Index i = 0; i < d_; ++i) {
    const double v = scale_ * x[i];
    out[i] = (v > 0.0 && v < 1.0) ? scale_ * r[i] : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------

PhaseRetrievalOperator::PhaseRetrievalOperator(Index d, Index oversampling)
    : d_(d), n_(d * oversampling), norm_(1.0 / std::sqrt(static_cast<double>(oversampling))) {
  if (d_ < 1 || oversampling < 1) throw InvalidArgument("phase retrieval: bad dimensions");
  cos_.resize(n_, d_);
  sin_.resize(n_, d_);
  for (Index k = 0; k < n_; ++k) {
    for (Index j = 0; j < d_; ++j) {
      // Reduce k*j mod n first so the angle stays exact for large indices.
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * j) % n_) / n_;
      cos_(k, j) = std::cos(angle);
      sin_(k, j) = std::sin(angle);
    }
  }
}

void PhaseRetrievalOperator::transform(const Signal& x, Eigen::VectorXd& re, Eigen::VectorXd& im) const {
  re.noalias() = cos_ * x;
  im.noalias() = -(sin_ * x);
}

Signal PhaseRetrievalOperator::apply(const Signal& x) const {
  Eigen::VectorXd re, im;
  transform(x, re, im);
  return norm_ * (re.array().square() + im.array().square()).sqrt().matrix();
}

Signal PhaseRetrievalOperator::smoothed_magnitude(const Signal& x) const {
  Eigen::VectorXd re, im;
  transform(x, re, im);
  return (norm_ * norm_ * (re.array().square() + im.array().square()) + kMagnitudeSmoothing).sqrt().matrix();
}

Signal PhaseRetrievalOperator::jacobian_transpose(const Signal& x, const Signal& r) const {
  Eigen::VectorXd re, im;
  transform(x, re, im);
  const Eigen::ArrayXd mag =
      (norm_ * norm_ * (re.array().square() + im.array().square()) + kMagnitudeSmoothing).sqrt();
  const Eigen::VectorXd wr = (r.array() * re.array() / mag).matrix();
  const Eigen::VectorXd wi = (r.array() * im.array() / mag).matrix();
  // d/dx_j |X_k|^2 = 2 re_k C_kj - 2 im_k S_kj
  return norm_ * norm_ * (cos_.transpose() * wr - sin_.transpose() * wi);
}

Signal PhaseRetrievalOperator::back_project(const Signal& y) const {
  return (cos_.transpose() * y) / (norm_ * static_cast<double>(n_));
}

// ---------------------------------------------------------------------------

Eigen::VectorXd gaussian_kernel(int taps, double std) {
  if (taps < 1 || !(std > 0.0)) throw InvalidArgument("gaussian_kernel: taps >= 1 and std > 0 required");
  Eigen::VectorXd k(taps);
  const double c = 0.5 * (taps - 1);
  for (int i = 0; i < taps; ++i) k[i] = std::exp(-0.5 * (i - c) * (i - c) / (std * std));
  return k / k.sum();
}

Eigen::VectorXd motion_kernel(int taps) {
  if (taps < 1) throw InvalidArgument("motion_kernel: taps >= 1 required");
  Eigen::VectorXd k(taps);
  const double scale = std::max(1.0, taps / 3.0);
  for (int i = 0; i < taps; ++i) k[i] = std::exp(-i / scale);
  return k / k.sum();
}

OperatorPtr make_operator(const ProblemSpec& spec, RandomStream& stream) {
  const Index d = spec.dim;
  if (d < 1) throw InvalidArgument("make_operator: dim must be >= 1");
  switch (spec.kind) {
    case OperatorKind::Identity:
      return std::make_shared<IdentityOperator>(d);
    case OperatorKind::RandomMask:
      return std::make_shared<MaskOperator>(MaskOperator::random(d, spec.keep_fraction, stream));
    case OperatorKind::BoxMask:
      return std::make_shared<MaskOperator>(MaskOperator::box(d, spec.box_start, spec.box_length));
    case OperatorKind::Convolution: {
      const Index h = spec.height;
      if (h < 1 || d % h != 0) throw InvalidArgument("convolution: height must divide dim");
      Eigen::MatrixXd kernel;
      const auto& ks = spec.kernel;
      if (ks.type == KernelType::Inline) {
        if (ks.values.empty() || ks.rows < 1 || ks.values.size() % static_cast<std::size_t>(ks.rows))
          throw InvalidArgument("convolution: inline kernel shape mismatch");
        const Index cols = static_cast<Index>(ks.values.size()) / ks.rows;
        kernel.resize(ks.rows, cols);
        for (Index a = 0; a < ks.rows; ++a)
          for (Index b = 0; b < cols; ++b) kernel(a, b) = ks.values[static_cast<std::size_t>(a * cols + b)];
      } else if (ks.type == KernelType::Gaussian) {
        const Eigen::VectorXd g = gaussian_kernel(ks.taps, ks.std);
        kernel = h > 1 ? Eigen::MatrixXd(g * g.transpose()) : Eigen::MatrixXd(g.transpose());
      } else {
        kernel = motion_kernel(ks.taps).transpose();
      }
      return std::make_shared<ConvolutionOperator>(h, d / h, std::move(kernel));
    }
    case OperatorKind::Decimation:
      return std::make_shared<DecimationOperator>(d, spec.factor);
    case OperatorKind::GaussianProjection:
      return std::make_shared<MatrixOperator>(MatrixOperator::gaussian(spec.measurements, d, stream));
    case OperatorKind::Hdr:
      return std::make_shared<HdrOperator>(d, spec.hdr_scale);
    case OperatorKind::PhaseRetrieval:
      return std::make_shared<PhaseRetrievalOperator>(d, spec.oversampling);
  }
  throw InvalidArgument("make_operator: unknown operator kind");
}

}  // namespace acdc
