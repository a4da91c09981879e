#pragma once

#include "acdc/core/random.hpp"
#include "acdc/core/schedule.hpp"
#include "acdc/core/signal.hpp"
#include "acdc/denoiser/acdc_denoiser.hpp"
#include "acdc/priors/gmm.hpp"
#include "acdc/priors/score_diagnostics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace acdc {

/// Residual constants of the AC-DC denoiser at one schedule point:
/// eps^2 = 3((sqrt2 M ss^2 / (1 - ss^2 M))^2 + sigma^4 M^2) and
/// delta^2 = 3(2 sigma^2 (d + 2 sqrt(d nu) + 2 nu) + 32 d ss^2 / (1 - M ss^2) log(2/nu)).
///
/// The log term is negative once nu > 2. `delta_sq` keeps it verbatim,
/// `delta_sq_conservative` clamps it at zero; `delta` is the root of the latter.
/// Outside sigma_s^2 + sigma^2 < 1/M every value is +inf and condition_ok is false.
struct Theorem2Constants {
  double epsilon = 0.0;
  double delta = 0.0;
  double epsilon_sq = 0.0;
  double delta_sq = 0.0;
  double delta_sq_conservative = 0.0;
  bool condition_ok = false;
  bool log_term_negative = false;
};

Theorem2Constants theorem2_constants(double M, double sigma, double sigma_s, double nu, Index d);

struct Theorem1Ball {
  double epsilon_bar = 0.0;
  double delta_bar = 0.0;
  double r = 0.0;
  /// eps / (mu (1 + eps - 2 eps^2)) < 1 / rho, equivalent to epsilon_bar < 1.
  bool step_condition = false;
};

/// eps_bar = (rho + rho eps + mu eps + 2 mu eps^2) / (rho + mu + 2 mu eps),
/// delta_bar^2 = delta^2 eps_bar / eps, r = (1 + rho / (rho + mu)) delta_bar / sqrt(1 - eps_bar^2).
/// r is +inf when eps_bar >= 1. eps = 0 is accepted only through the limit
/// (delta_bar = 0 when delta = 0, +inf otherwise).
Theorem1Ball theorem1_ball(double epsilon, double delta, double mu, double rho);

struct Theorem3Bound {
  double c = 0.0;               ///< verbatim
  double c_conservative = 0.0;  ///< log term clamped at zero
  double log_term = 0.0;        ///< 16 ss^2 / (1 - M ss^2) log(2/nu)
  bool log_term_negative = false;
  bool condition_ok = false;
};

/// c = sigma^2 (2 + 4 sqrt(nu) + 4 nu) + 16 ss^2 / (1 - M ss^2) log(2/nu) + 2 ss^4 L^2 + 2 sigma^4 L^2.
Theorem3Bound theorem3_ck(double M, double sigma, double sigma_s, double nu, double L);

struct MtBound {
  double value = 0.0;
  bool valid = false;  ///< sigma^2 < 1/M
};

/// M / (1 + M sigma^2).
MtBound mt_bound(double M, double sigma);

/// One stochastic evaluation of a denoiser. Each call gets its own stream.
using StochasticDenoiser = std::function<Signal(const Signal&, RandomStream&)>;

/// acdc_denoise at a fixed schedule point, streams derived from the call stream.
StochasticDenoiser make_acdc_denoiser(const ScoreModel& model, const SchedulePoint& point, DenoiserConfig config);

/// Prior draws perturbed by N(0, sigma^2 I).
PointSampler prior_sampler(const GaussianMixturePrior& prior, double sigma);
/// Uniform draws from [lo, hi]^d.
PointSampler box_sampler(Index d, double lo, double hi);

struct RateTest {
  int samples = 0;
  int violations = 0;
  double violation_rate = 0.0;
  double ceiling = 0.0;    ///< 2 exp(-nu)
  double tolerance = 0.0;  ///< ceiling + 0.05
  bool pass = false;
  std::vector<double> lhs;
  std::vector<double> rhs;
};

/// Fraction of sampled pairs with ||R(x) - R(y)||^2 > eps^2 ||x - y||^2 + delta^2, R = D - I.
/// Every point is denoised once with an independent substream.
RateTest test_weak_nonexpansiveness(const StochasticDenoiser& denoiser, double epsilon, double delta, double nu,
                                    int n_pairs, const PointSampler& sampler, RandomStream& stream);

/// Fraction of sampled points with ||D(x) - x||^2 / d > c^2.
RateTest test_boundedness(const StochasticDenoiser& denoiser, double c, double nu, int n_points,
                          const PointSampler& sampler, RandomStream& stream);

struct BallConvergence {
  double tail_diameter = 0.0;
  bool converged = false;
};

/// Max pairwise distance over the last `tail` entries, compared with 2r.
BallConvergence ball_convergence_detect(const std::vector<Signal>& trace, int tail, double r);

struct Quality {
  double mse = 0.0;
  double psnr = 0.0;
};

inline constexpr double kPsnrCap = 300.0;

Quality psnr_mse(const Signal& est, const Signal& truth, double peak);
/// Peak = max |truth|, or 1 for an all-zero truth.
Quality psnr_mse(const Signal& est, const Signal& truth);

struct BoundInputs {
  double M = 0.0;
  bool M_analytic = false;
  double sigma = 0.0;
  double sigma_s = 0.0;
  double nu = 0.0;
  Index d = 1;
  double mu = 0.0;   ///< strong convexity of the fidelity, 0 if none
  double rho = 0.0;
  double L = 0.0;    ///< M D + S
};

struct BoundReport {
  BoundInputs inputs;
  double M_sigma_bound = 0.0;
  Theorem2Constants thm2;
  std::optional<Theorem1Ball> thm1;  ///< only when mu > 0 and 0 < eps < 1
  Theorem3Bound thm3;
  bool cond_smoothing = false;  ///< sigma_s^2 + sigma^2 < 1/M
  bool cond_epsilon = false;    ///< eps < 1
  bool cond_step = false;
  std::vector<std::string> notes;
};

BoundReport make_bound_report(const BoundInputs& in);

/// Pretty JSON, non-finite numbers written as null.
std::string bound_report_json(const BoundReport& report);

}  // namespace acdc
