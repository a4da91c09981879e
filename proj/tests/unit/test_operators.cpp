#include "acdc/core/errors.hpp"
#include "acdc/operators/fidelity.hpp"
#include "acdc/operators/forward_operator.hpp"
#include "acdc/operators/inner_solver.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <memory>

using namespace acdc;

namespace {

std::vector<OperatorPtr> linear_operators() {
  RandomStream s(21);
  std::vector<OperatorPtr> ops;
  ops.push_back(std::make_shared<IdentityOperator>(12));
  ops.push_back(std::make_shared<MaskOperator>(MaskOperator::random(12, 0.5, s)));
  ops.push_back(std::make_shared<MaskOperator>(MaskOperator::box(12, 3, 4)));
  ops.push_back(std::make_shared<ConvolutionOperator>(1, 12, Eigen::MatrixXd(gaussian_kernel(5, 1.0).transpose())));
  ops.push_back(std::make_shared<ConvolutionOperator>(1, 12, Eigen::MatrixXd(motion_kernel(5).transpose())));
  Eigen::MatrixXd k2(3, 3);
  k2 << 0.1, 0.2, 0.0, 0.05, 0.4, 0.1, 0.0, 0.1, 0.05;
  ops.push_back(std::make_shared<ConvolutionOperator>(3, 4, k2));
  ops.push_back(std::make_shared<DecimationOperator>(12, 3));
  ops.push_back(std::make_shared<MatrixOperator>(MatrixOperator::gaussian(5, 12, s)));
  return ops;
}

}  // namespace

TEST(Operators, AdjointConsistency) {
  RandomStream s(8);
  for (const auto& op : linear_operators()) {
    for (int t = 0; t < 5; ++t) {
      const Signal x = s.normal_vector(op->input_dim());
      const Signal y = s.normal_vector(op->output_dim());
      EXPECT_NEAR(op->apply(x).dot(y), x.dot(op->adjoint(y)), 1e-10) << op->name();
    }
  }
}

TEST(Operators, Identity) {
  IdentityOperator id(4);
  RandomStream s(1);
  const Signal x = s.normal_vector(4);
  EXPECT_EQ(id.apply(x), x);
  EXPECT_EQ(id.adjoint(x), x);
  EXPECT_TRUE(id.dense().isIdentity());
}

TEST(Operators, RandomMaskKeepsBinomialCount) {
  // q = 0.3 on d = 100: mean 30, sd sqrt(21)
  double total = 0.0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    RandomStream s(static_cast<std::uint64_t>(t));
    total += static_cast<double>(MaskOperator::random(100, 0.3, s).kept());
  }
  EXPECT_NEAR(total / trials, 30.0, 3.0 * std::sqrt(21.0 / trials));
  RandomStream s(0);
  EXPECT_THROW(MaskOperator::random(10, 0.0, s), InvalidArgument);
  EXPECT_THROW(MaskOperator::random(10, 1.5, s), InvalidArgument);
  EXPECT_EQ(MaskOperator::random(10, 1.0, s).kept(), 10);
}

TEST(Operators, BoxMaskZeroesBlock) {
  const auto m = MaskOperator::box(8, 2, 3);
  const Signal y = m.apply(Signal::Ones(8));
  for (Index i = 0; i < 8; ++i) EXPECT_EQ(y[i], (i >= 2 && i < 5) ? 0.0 : 1.0);
  EXPECT_THROW(MaskOperator::box(8, 6, 3), InvalidArgument);
}

TEST(Operators, ConvolutionOfImpulseIsKernel) {
  Eigen::MatrixXd k(1, 3);
  k << 0.2, 0.5, 0.3;
  ConvolutionOperator c(1, 7, k);
  Signal e = Signal::Zero(7);
  e[3] = 1.0;
  const Signal y = c.apply(e);
  EXPECT_NEAR(y[2], 0.2, 1e-15);
  EXPECT_NEAR(y[3], 0.5, 1e-15);
  EXPECT_NEAR(y[4], 0.3, 1e-15);
  EXPECT_NEAR(y.sum(), 1.0, 1e-15);
  // circular wrap
  Signal e0 = Signal::Zero(7);
  e0[0] = 1.0;
  EXPECT_NEAR(c.apply(e0)[6], 0.2, 1e-15);
  EXPECT_NEAR(c.apply(e0)[1], 0.3, 1e-15);
}

TEST(Operators, KernelsAreNormalised) {
  EXPECT_NEAR(gaussian_kernel(9, 3.0 * 9.0 / 61.0).sum(), 1.0, 1e-14);
  const auto m = motion_kernel(9);
  EXPECT_NEAR(m.sum(), 1.0, 1e-14);
  EXPECT_GT(m[0], m[8]);
}

TEST(Operators, DecimationAverages) {
  DecimationOperator d(6, 2);
  Signal x(6);
  x << 1, 3, 5, 7, 2, 2;
  const Signal y = d.apply(x);
  ASSERT_EQ(y.size(), 3);
  EXPECT_DOUBLE_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], 6.0);
  EXPECT_DOUBLE_EQ(y[2], 2.0);
  EXPECT_THROW(DecimationOperator(7, 2), InvalidArgument);
}

TEST(Operators, GaussianProjectionVariance) {
  RandomStream s(4);
  const auto a = MatrixOperator::gaussian(50, 40, s);
  const double var = a.matrix().array().square().mean();
  EXPECT_NEAR(var, 1.0 / 50.0, 0.1 / 50.0);
}

TEST(Operators, HdrClipsAndIsOneLipschitzAfterScaling) {
  HdrOperator h(4, 2.0);
  Signal x(4);
  x << -0.3, 0.2, 0.45, 0.9;
  const Signal y = h.apply(x);
  EXPECT_DOUBLE_EQ(y[0], 0.0);
  EXPECT_DOUBLE_EQ(y[1], 0.4);
  EXPECT_DOUBLE_EQ(y[2], 0.9);
  EXPECT_DOUBLE_EQ(y[3], 1.0);
  EXPECT_FALSE(h.is_linear());
  EXPECT_THROW(h.adjoint(y), InvalidArgument);
  RandomStream s(6);
  for (int t = 0; t < 100; ++t) {
    const Signal a = s.normal_vector(4), b = s.normal_vector(4);
    EXPECT_LE((h.apply(a) - h.apply(b)).norm(), 2.0 * (a - b).norm() + 1e-15);
  }
}

TEST(Operators, PhaseRetrievalConstantSignal) {
  const Index d = 8;
  const double c = 1.5;
  PhaseRetrievalOperator p(d, 2);
  ASSERT_EQ(p.output_dim(), 16);
  const Signal y = p.apply(Signal::Constant(d, c));
  EXPECT_NEAR(y[0], c * d / std::sqrt(2.0), 1e-12);
  for (Index k = 2; k < 16; k += 2) EXPECT_NEAR(y[k], 0.0, 1e-12) << k;
  // odd bins: |sum_n e^{-2 pi i k n / 16}| = 1 / |sin(pi k / 16)| for the length-8 box
  for (Index k = 1; k < 16; k += 2) EXPECT_NEAR(y[k], c / std::abs(std::sin(M_PI * k / 16.0)) / std::sqrt(2.0), 1e-10);
}

TEST(Operators, PhaseRetrievalMatchesDirectDft) {
  const Index d = 6;
  PhaseRetrievalOperator p(d, 2);
  RandomStream s(2);
  const Signal x = s.normal_vector(d);
  const Signal y = p.apply(x);
  for (Index k = 0; k < 12; ++k) {
    double re = 0.0, im = 0.0;
    for (Index n = 0; n < d; ++n) {
      re += x[n] * std::cos(2.0 * M_PI * k * n / 12.0);
      im -= x[n] * std::sin(2.0 * M_PI * k * n / 12.0);
    }
    EXPECT_NEAR(y[k], std::hypot(re, im) / std::sqrt(2.0), 1e-10);
  }
}

TEST(Fidelity, GradientExamples) {
  auto id = std::make_shared<IdentityOperator>(3);
  Signal y(3);
  y << 1, 2, 3;
  DataFidelity f(id, y, 1.0);
  EXPECT_LT(f.grad(y).norm(), 1e-15);
  Signal x = y;
  x[0] += 1.0;
  const Signal g = fidelity_grad(f, x);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(f.loss(x), 0.5);
}

TEST(Fidelity, GradientMatchesFiniteDifferences) {
  RandomStream s(13);
  std::vector<OperatorPtr> ops = linear_operators();
  ops.push_back(std::make_shared<HdrOperator>(12, 2.0));
  ops.push_back(std::make_shared<PhaseRetrievalOperator>(12, 2));
  for (const auto& op : ops) {
    const Signal y = op->apply(s.normal_vector(12)) + 0.1 * s.normal_vector(op->output_dim());
    DataFidelity f(op, y, 0.5);
    for (int t = 0; t < 5; ++t) {
      Signal x = s.normal_vector(12);
      if (op->name() == "hdr") x = 0.2 + 0.1 * x.array();  // keep away from the clip kinks
      const Signal fd = oracle::numeric_gradient([&](const Signal& v) { return f.loss(v); }, x, 1e-5);
      const Signal g = f.grad(x);
      EXPECT_LE((fd - g).norm(), 1e-5 * std::max(1.0, g.norm())) << op->name();
    }
  }
}

TEST(Fidelity, StrongConvexity) {
  auto id = std::make_shared<IdentityOperator>(3);
  DataFidelity f(id, Signal::Zero(3), 0.05);
  EXPECT_NEAR(f.strong_convexity(), 400.0, 1e-9);
  RandomStream s(3);
  auto wide = std::make_shared<MatrixOperator>(MatrixOperator::gaussian(2, 5, s));
  EXPECT_EQ(DataFidelity(wide, Signal::Zero(2), 0.05).strong_convexity(), 0.0);
  auto pr = std::make_shared<PhaseRetrievalOperator>(4, 2);
  EXPECT_EQ(DataFidelity(pr, Signal::Zero(8), 0.05).strong_convexity(), 0.0);
  EXPECT_THROW(DataFidelity(id, Signal::Zero(2), 0.05), InvalidArgument);
  EXPECT_THROW(DataFidelity(id, Signal::Zero(3), 0.0), InvalidArgument);
}

TEST(InnerSolver, IdentityClosedForm) {
  auto id = std::make_shared<IdentityOperator>(4);
  RandomStream s(5);
  const Signal y = s.normal_vector(4), z = s.normal_vector(4), u = s.normal_vector(4);
  const double rho = 3.0, sn = 0.2;
  DataFidelity f(id, y, sn);
  const double w = 1.0 / (rho * sn * sn);
  const Signal expected = (w * y + z - u) / (w + 1.0);
  EXPECT_LE((solve_x_subproblem(f, z, u, rho, InnerSolverSpec{}).x - expected).norm(), 1e-9);
}

TEST(InnerSolver, LimitsAndFixedPoint) {
  auto id = std::make_shared<IdentityOperator>(4);
  RandomStream s(5);
  const Signal y = s.normal_vector(4), z = s.normal_vector(4), u = s.normal_vector(4);
  DataFidelity f(id, y, 0.05);
  EXPECT_LE((solve_x_subproblem(f, z, u, 1e12, InnerSolverSpec{}).x - (z - u)).norm(), 1e-6);
  for (double rho : {0.01, 1.0, 100.0})
    EXPECT_LE((solve_x_subproblem(f, y, Signal::Zero(4), rho, InnerSolverSpec{}).x - y).norm(), 1e-9);
  EXPECT_THROW(solve_x_subproblem(f, z, u, 0.0, InnerSolverSpec{}), InvalidArgument);
}

TEST(InnerSolver, LinearSubproblemOptimality) {
  RandomStream s(9);
  for (const auto& op : linear_operators()) {
    const Signal y = op->apply(s.normal_vector(12));
    DataFidelity f(op, y, 0.05);
    const Signal z = s.normal_vector(12), u = 0.1 * s.normal_vector(12);
    const double rho = 10.0;
    const Signal x = solve_x_subproblem(f, z, u, rho, InnerSolverSpec{}).x;
    const Signal grad = f.grad(x) / rho + (x - z + u);
    EXPECT_LE(grad.norm(), 1e-6 * (1.0 + x.norm())) << op->name();
  }
}

TEST(InnerSolver, ConjugateGradientReportsNonConvergence) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(10, 10);
  for (int i = 0; i < 10; ++i) m(i, i) = std::pow(10.0, i - 5);
  const auto apply = [&m](const Signal& v) { return Signal(m * v); };
  const Signal b = Signal::Ones(10);
  try {
    conjugate_gradient(apply, b, Signal::Zero(10), 1e-12, 2);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 2);
    EXPECT_GT(e.residual(), 1e-12);
  }
  const auto ok = conjugate_gradient(apply, b, Signal::Zero(10), 1e-10, 50);
  EXPECT_LE((m * ok.x - b).norm(), 1e-9 * b.norm());
}

TEST(InnerSolver, AdamMinimisesQuadratic) {
  InnerSolverSpec spec;
  spec.learning_rate = 0.05;
  spec.max_iters = 2000;
  const Signal target = Signal::LinSpaced(3, -1.0, 1.0);
  const auto obj = [&](const Signal& x, Signal& g) {
    g = x - target;
    return 0.5 * g.squaredNorm();
  };
  const auto r = adam_minimize(obj, Signal::Zero(3), spec);
  EXPECT_LE((r.x - target).norm(), 1e-3);
  EXPECT_LE(r.iterations, 2000);
}

TEST(InnerSolver, AdamEarlyStopsOnRisingLoss) {
  InnerSolverSpec spec;
  spec.max_iters = 1000;
  spec.patience = 3;
  spec.delta_tol = 0.1;
  int calls = 0;
  // loss climbs by 1 per evaluation regardless of x
  const auto obj = [&](const Signal&, Signal& g) {
    g = Signal::Ones(2);
    return static_cast<double>(calls++);
  };
  const auto r = adam_minimize(obj, Signal::Zero(2), spec);
  EXPECT_TRUE(r.early_stop);
  EXPECT_LT(r.iterations, 10);
  EXPECT_DOUBLE_EQ(r.loss, 0.0);
}

TEST(InnerSolver, AdamDivergenceIsReported) {
  const auto obj = [](const Signal&, Signal& g) {
    g = Signal::Ones(2);
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(adam_minimize(obj, Signal::Zero(2), InnerSolverSpec{}), DivergenceError);
}

TEST(InnerSolver, NonlinearSubproblemDecreasesObjective) {
  auto pr = std::make_shared<PhaseRetrievalOperator>(8, 2);
  RandomStream s(31);
  const Signal truth = s.normal_vector(8);
  DataFidelity f(pr, pr->apply(truth), 0.05);
  const Signal z = truth + 0.3 * s.normal_vector(8);
  const Signal u = Signal::Zero(8);
  const double rho = 100.0;
  const auto obj = [&](const Signal& x) { return f.loss(x) / rho + 0.5 * (x - z + u).squaredNorm(); };
  const auto r = solve_x_subproblem(f, z, u, rho, InnerSolverSpec{});
  EXPECT_LT(obj(r.x), obj(z - u));
  EXPECT_GT(r.iterations, 0);
}
