#include "acdc/core/errors.hpp"
#include "acdc/solver/problem.hpp"
#include "acdc/solver/solver.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

using namespace acdc;

namespace {

NoiseSchedule frozen(double sigma, int iters, int J = 0) {
  NoiseSchedule s;
  s.kind = ScheduleKind::Constant;
  s.sigma_max = sigma;
  s.window = iters;
  s.tail = 0;
  s.dc_steps = J;
  return s;
}

ExperimentConfig cs_config() {
  ExperimentConfig c;
  c.problem.kind = OperatorKind::GaussianProjection;
  c.problem.dim = 16;
  c.problem.measurements = 8;
  c.prior.weights = {0.5, 0.5};
  c.prior.means = {std::vector<double>(16, 1.0), std::vector<double>(16, -1.0)};
  c.prior.stds = {0.5, 0.5};
  c.schedule.window = 30;
  return c;
}

}  // namespace

TEST(RelativeResidue, Examples) {
  SolverState a{Signal::Zero(4), Signal::Zero(4), Signal::Zero(4)};
  EXPECT_EQ(relative_residue(a, a), 0.0);
  SolverState b = a;
  b.x[0] = 1.0;
  EXPECT_DOUBLE_EQ(relative_residue(b, a), 0.5);
  SolverState c = a;
  c.x << 1, 2, 0, 0;
  c.z << 0, 1, 1, 0;
  c.u << 3, 0, 0, 1;
  SolverState c3 = a;
  c3.x = 3 * c.x;
  c3.z = 3 * c.z;
  c3.u = 3 * c.u;
  EXPECT_NEAR(relative_residue(c3, a), 3.0 * relative_residue(c, a), 1e-14);
  SolverState bad{Signal::Zero(3), Signal::Zero(3), Signal::Zero(3)};
  EXPECT_THROW(relative_residue(bad, a), InvalidArgument);
}

TEST(AdaptRho, TwoCases) {
  EXPECT_EQ(adapt_rho(0.5, 1.0, 100.0, 1.2, 0.9), 100.0);
  EXPECT_DOUBLE_EQ(adapt_rho(1.0, 1.0, 100.0, 1.2, 0.9), 120.0);
  EXPECT_DOUBLE_EQ(adapt_rho(0.0, 0.0, 100.0, 1.2, 0.9), 120.0);
  EXPECT_DOUBLE_EQ(adapt_rho(1e-9, 0.0, 100.0, 1.2, 0.9), 120.0);
}

TEST(Admm, IdentityWithDegenerateDenoiserSolvesLeastSquares) {
  auto id = std::make_shared<IdentityOperator>(5);
  RandomStream s(1);
  const Signal y = s.normal_vector(5);
  DataFidelity f(id, y, 0.05);
  const auto prior = GaussianMixturePrior::single(Signal::Zero(5), 1.0);
  SolverSpec spec;
  spec.zero_noise = true;
  const auto r = admm_pnp_solve(spec, frozen(0.0, 20), f, prior, nullptr, RandomStream(2));
  EXPECT_LE((r.state.x - y).norm(), 1e-9);
  EXPECT_LE((r.state.z - y).norm(), 1e-9);
  EXPECT_LE(r.state.u.norm(), 1e-9);
  EXPECT_EQ(r.trace.size(), 20u);
  EXPECT_FALSE(r.trace[0].mse.has_value());
}

TEST(Admm, DualUpdateExactness) {
  const ExperimentConfig c = cs_config();
  ExperimentConfig cc = c;
  cc.solver.record_iterates = true;
  const RandomStream st(3);
  const Problem p = make_problem(cc, st);
  const auto r = run_experiment(cc, p, st);
  ASSERT_EQ(r.iterates.size(), r.trace.size());
  Signal u_prev = Signal::Zero(16);
  for (const auto& it : r.iterates) {
    EXPECT_LE(((it.u - u_prev) - (it.x - it.z)).cwiseAbs().maxCoeff(), 1e-12);
    u_prev = it.u;
  }
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    EXPECT_NEAR(r.trace[k].dual_change, r.trace[k].primal_res, 1e-12 * (1.0 + r.trace[k].primal_res));
    EXPECT_TRUE(std::isfinite(r.trace[k].beta));
  }
  EXPECT_EQ(r.estimate, r.state.z);
}

TEST(Admm, DeterministicGivenSeed) {
  const ExperimentConfig c = cs_config();
  const RandomStream st(4);
  const auto a = run_experiment(c, make_problem(c, st), st);
  const auto b = run_experiment(c, make_problem(c, st), st);
  std::ostringstream oa, ob;
  write_trace_csv(oa, a.trace, false);
  write_trace_csv(ob, b.trace, false);
  EXPECT_EQ(oa.str(), ob.str());
  EXPECT_EQ(a.estimate, b.estimate);
}

TEST(Admm, BeatsMinimumNormLeastSquaresOnMostSeeds) {
  ExperimentConfig c = cs_config();
  c.schedule.window = 100;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RandomStream st(seed);
    const Problem p = make_problem(c, st);
    const auto r = run_experiment(c, p, st);
    const Signal ls = min_norm_least_squares(p.fidelity.op(), p.fidelity.observation());
    if ((r.estimate - p.truth).squaredNorm() < (ls - p.truth).squaredNorm()) ++wins;
  }
  EXPECT_GE(wins, 16);
}

TEST(Admm, AdaptiveRhoIsNondecreasing) {
  ExperimentConfig c = cs_config();
  c.solver.adaptive_rho = true;
  const RandomStream st(5);
  const auto r = run_experiment(c, make_problem(c, st), st);
  int increases = 0;
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    EXPECT_GE(r.trace[k].rho, r.trace[k - 1].rho);
    if (r.trace[k].rho > r.trace[k - 1].rho) ++increases;
  }
  EXPECT_EQ(increases + (r.state.rho > r.trace.back().rho ? 1 : 0), r.rho_increases);
  EXPECT_DOUBLE_EQ(r.trace[0].rho, c.solver.rho0);
}

TEST(Admm, RejectsBadAdaptiveSettings) {
  auto id = std::make_shared<IdentityOperator>(2);
  DataFidelity f(id, Signal::Zero(2), 0.05);
  const auto prior = GaussianMixturePrior::single(Signal::Zero(2), 1.0);
  SolverSpec spec;
  spec.adaptive_rho = true;
  spec.gamma_rho = 1.0;
  EXPECT_THROW(admm_pnp_solve(spec, frozen(0.1, 3), f, prior, nullptr, RandomStream(1)), InvalidArgument);
  spec = SolverSpec{};
  spec.rho0 = 0.0;
  EXPECT_THROW(admm_pnp_solve(spec, frozen(0.1, 3), f, prior, nullptr, RandomStream(1)), InvalidArgument);
}

TEST(Admm, NonlinearOperatorRuns) {
  ExperimentConfig c;
  c.problem.kind = OperatorKind::PhaseRetrieval;
  c.problem.dim = 8;
  c.prior.means = {std::vector<double>{1, 0.8, 0.5, 0.2, 0, 0, 0, 0}};
  c.prior.stds = {0.1};
  c.schedule.window = 10;
  c.schedule.sigma_max = 1.0;
  c.solver.inner.max_iters = 50;
  const RandomStream st(6);
  const Problem p = make_problem(c, st);
  const auto r = run_experiment(c, p, st);
  EXPECT_EQ(r.trace.size(), 20u);
  EXPECT_TRUE(r.estimate.allFinite());
}

TEST(DiffPir, ZeroSigmaIsPlainHqs) {
  auto id = std::make_shared<IdentityOperator>(3);
  RandomStream s(7);
  const Signal y = s.normal_vector(3);
  DataFidelity f(id, y, 0.1);
  const auto prior = GaussianMixturePrior::single(Signal::Zero(3), 1.0);
  SolverSpec spec;
  spec.method = SolverMethod::DiffPir;
  spec.mu_hqs = 2.0;
  const auto r = diffpir_solve(spec, frozen(0.0, 30), f, prior, nullptr, RandomStream(8));
  // denoiser is the identity so z = x and HQS converges to y
  EXPECT_LE((r.estimate - y).norm(), 1e-9);
  for (const auto& rec : r.trace) EXPECT_DOUBLE_EQ(rec.rho, 2.0);
}

TEST(DiffPir, FirstIterationInjectsPureNoise) {
  auto id = std::make_shared<IdentityOperator>(3);
  const Signal y = Signal::Ones(3);
  DataFidelity f(id, y, 0.1);
  // prior so wide that Tweedie is almost the identity
  const auto prior = GaussianMixturePrior::single(Signal::Zero(3), 1e6);
  SolverSpec spec;
  spec.zeta = 1.0;
  spec.mu_hqs = 1.0;
  const double sigma = 0.5;
  const RandomStream st(9);
  const auto r = diffpir_solve(spec, frozen(sigma, 1), f, prior, nullptr, st);
  // x = y at the first step (z = back projection = y), so z ~ y + sigma n
  RandomStream noise = st.substream("diffpir");
  const Signal expected = y + sigma * noise.normal_vector(3);
  EXPECT_LE((r.estimate - expected).norm(), 1e-6);
}

TEST(DiffPir, SanityBandAgainstAdmm) {
  ExperimentConfig c;
  c.problem.kind = OperatorKind::Identity;
  c.problem.dim = 8;
  c.prior.weights = {0.5, 0.5};
  c.prior.means = {std::vector<double>(8, 0.7), std::vector<double>(8, -0.7)};
  c.prior.stds = {1.0, 1.0};
  c.schedule.kind = ScheduleKind::Constant;
  c.schedule.sigma_max = 0.3;
  c.schedule.window = 100;
  double admm = 0.0, dp = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RandomStream st(seed);
    const Problem p = make_problem(c, st);
    admm += (run_experiment(c, p, st).estimate - p.truth).squaredNorm();
    ExperimentConfig d = c;
    d.solver.method = SolverMethod::DiffPir;
    dp += (run_experiment(d, p, st).estimate - p.truth).squaredNorm();
  }
  EXPECT_LE(dp, 2.0 * admm);
}

TEST(Snore, FixedPointAtPriorMean) {
  auto id = std::make_shared<IdentityOperator>(2);
  const Signal mu = Signal::Constant(2, 0.3);
  // y = mu makes the fidelity gradient vanish at mu
  DataFidelity f(id, mu, 0.1);
  const auto prior = GaussianMixturePrior::single(mu, 1.0);
  SolverSpec spec;
  spec.method = SolverMethod::Snore;
  const auto r = snore_solve(spec, frozen(0.0, 10), f, prior, nullptr, RandomStream(1));
  EXPECT_LE((r.estimate - mu).norm(), 1e-15);
}

TEST(Snore, StationaryMeanMatchesGaussianMap) {
  // x <- x - delta (x - y)/sn^2 - eta sigma^2/(s^2+sigma^2) (x + sigma e - mu)
  // stationary mean: the minimiser of |x - y|^2/(2 sn^2) + c |x - mu|^2 / 2 with
  // c = eta sigma^2 / ((s^2 + sigma^2) delta)
  const double sn = 0.5, s = 1.0, sigma = 0.5, delta = 0.01, eta = 0.2;
  auto id = std::make_shared<IdentityOperator>(1);
  Signal y(1), mu(1);
  y << 2.0;
  mu << -1.0;
  DataFidelity f(id, y, sn);
  const auto prior = GaussianMixturePrior::single(mu, s);
  SolverSpec spec;
  spec.method = SolverMethod::Snore;
  spec.snore_step = delta;
  spec.snore_reg = eta;
  const int burn = 500, total = 20500;
  spec.record_iterates = true;
  const auto rr = snore_solve(spec, frozen(sigma, total), f, prior, nullptr, RandomStream(3));
  double mean = 0.0, sq = 0.0;
  const int n = total - burn;
  for (int k = burn; k < total; ++k) {
    const double v = rr.iterates[static_cast<std::size_t>(k)].x[0];
    mean += v;
    sq += v * v;
  }
  mean /= n;
  const double var = sq / n - mean * mean;
  const double a = delta / (sn * sn);
  const double b = eta * sigma * sigma / (s * s + sigma * sigma);
  const double map = (a * y[0] + b * mu[0]) / (a + b);
  // AR(1) with coefficient 1 - a - b: effective sample size n (a + b) / (2 - a - b)
  const double phi = 1.0 - a - b;
  const double se = std::sqrt(var / n * (1.0 + phi) / (1.0 - phi));
  EXPECT_LE(std::abs(mean - map), 3.0 * se);
}

TEST(Snore, ZeroNoiseIsDeterministicDescent) {
  auto id = std::make_shared<IdentityOperator>(2);
  Signal y(2);
  y << 1.0, -1.0;
  DataFidelity f(id, y, 1.0);
  const auto prior = GaussianMixturePrior::single(Signal::Zero(2), 1.0);
  SolverSpec spec;
  spec.method = SolverMethod::Snore;
  spec.zero_noise = true;
  spec.snore_step = 0.1;
  spec.snore_reg = 0.5;
  const auto a = snore_solve(spec, frozen(0.5, 5), f, prior, nullptr, RandomStream(1));
  const auto b = snore_solve(spec, frozen(0.5, 5), f, prior, nullptr, RandomStream(99));
  EXPECT_EQ(a.estimate, b.estimate);
  // hand iteration
  Signal x = y;
  for (int k = 0; k < 5; ++k) x = x - 0.1 * (x - y) - 0.5 * (0.25 / 1.25) * x;
  EXPECT_LE((a.estimate - x).norm(), 1e-14);
  spec.snore_step = 0.0;
  EXPECT_THROW(snore_solve(spec, frozen(0.5, 5), f, prior, nullptr, RandomStream(1)), InvalidArgument);
}

TEST(Snore, DivergenceIsReportedWithIteration) {
  auto id = std::make_shared<IdentityOperator>(2);
  DataFidelity f(id, Signal::Ones(2), 1e-3);
  const auto prior = GaussianMixturePrior::single(Signal::Zero(2), 1.0);
  SolverSpec spec;
  spec.method = SolverMethod::Snore;
  spec.snore_step = 1.0;  // step 1e6 times the curvature
  try {
    snore_solve(spec, frozen(0.1, 200), f, prior, nullptr, RandomStream(1));
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.iteration(), 0);
  }
}

TEST(TraceCsv, HeaderAndEmptyColumns) {
  IterationRecord r;
  r.k = 3;
  r.sigma = 0.5;
  r.ms = 12.0;
  std::ostringstream out;
  write_trace_csv(out, {r}, false);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), std::string(kTraceHeader));
  EXPECT_NE(text.find("\n3,0.5,"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 3), ",,\n");
  std::ostringstream timed;
  r.mse = 0.25;
  write_trace_csv(timed, {r}, true);
  EXPECT_NE(timed.str().find(",0.25,12\n"), std::string::npos);
}

TEST(Problem, MinNormLeastSquares) {
  RandomStream s(3);
  const auto a = MatrixOperator::gaussian(3, 6, s);
  const Signal y = s.normal_vector(3);
  const Signal x = min_norm_least_squares(a, y);
  EXPECT_LE((a.apply(x) - y).norm(), 1e-10);
  // minimum norm: x lies in the row space
  const Eigen::MatrixXd m = a.matrix();
  const Signal proj = m.transpose() * (m * m.transpose()).ldlt().solve(m * x);
  EXPECT_LE((proj - x).norm(), 1e-10);
  EXPECT_THROW(min_norm_least_squares(HdrOperator(3, 2.0), y), InvalidArgument);
}
