#include "acdc/diagnostics/bounds.hpp"

#include "acdc/core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace acdc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool smoothing_condition(double M, double sigma, double sigma_s) {
  return M <= 0.0 || sigma_s * sigma_s + sigma * sigma < 1.0 / M;
}

void check_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

Theorem2Constants theorem2_constants(double M, double sigma, double sigma_s, double nu, Index d) {
  check_nonneg(M, "theorem2_constants: M");
  check_nonneg(sigma, "theorem2_constants: sigma");
  check_nonneg(sigma_s, "theorem2_constants: sigma_s");
  if (!(nu > 0.0)) throw InvalidArgument("theorem2_constants: nu must be positive");
  if (d < 1) throw InvalidArgument("theorem2_constants: d must be positive");

  Theorem2Constants out;
  out.condition_ok = smoothing_condition(M, sigma, sigma_s);
  if (!out.condition_ok) {
    out.epsilon = out.delta = out.epsilon_sq = out.delta_sq = out.delta_sq_conservative = kInf;
    return out;
  }
  const double ss2 = sigma_s * sigma_s;
  const double s2 = sigma * sigma;
  const double dd = static_cast<double>(d);
  const double a = std::sqrt(2.0) * M * ss2 / (1.0 - ss2 * M);
  out.epsilon_sq = 3.0 * (a * a + s2 * s2 * M * M);
  out.epsilon = std::sqrt(out.epsilon_sq);

  const double gauss = 2.0 * s2 * (dd + 2.0 * std::sqrt(dd * nu) + 2.0 * nu);
  const double log_term = 32.0 * dd * ss2 / (1.0 - M * ss2) * std::log(2.0 / nu);
  out.log_term_negative = log_term < 0.0;
  out.delta_sq = 3.0 * (gauss + log_term);
  out.delta_sq_conservative = 3.0 * (gauss + std::max(log_term, 0.0));
  out.delta = std::sqrt(out.delta_sq_conservative);
  return out;
}

Theorem1Ball theorem1_ball(double epsilon, double delta, double mu, double rho) {
  if (!(epsilon >= 0.0) || !(epsilon < 1.0)) throw InvalidArgument("theorem1_ball: epsilon must lie in [0, 1)");
  check_nonneg(delta, "theorem1_ball: delta");
  if (!(mu > 0.0) || !(rho > 0.0)) throw InvalidArgument("theorem1_ball: mu and rho must be positive");

  Theorem1Ball out;
  const double e = epsilon;
  out.epsilon_bar = (rho + rho * e + mu * e + 2.0 * mu * e * e) / (rho + mu + 2.0 * mu * e);
  out.step_condition = e / (mu * (1.0 + e - 2.0 * e * e)) < 1.0 / rho;
  if (delta == 0.0)
    out.delta_bar = 0.0;
  else if (e == 0.0)
    out.delta_bar = kInf;
  else
    out.delta_bar = std::sqrt(delta * delta * out.epsilon_bar / e);

  if (out.epsilon_bar >= 1.0)
    out.r = kInf;
  else
    out.r = (1.0 + rho / (rho + mu)) * out.delta_bar / std::sqrt(1.0 - out.epsilon_bar * out.epsilon_bar);
  return out;
}

Theorem3Bound theorem3_ck(double M, double sigma, double sigma_s, double nu, double L) {
  check_nonneg(M, "theorem3_ck: M");
  check_nonneg(sigma, "theorem3_ck: sigma");
  check_nonneg(sigma_s, "theorem3_ck: sigma_s");
  check_nonneg(L, "theorem3_ck: L");
  if (!(nu > 0.0)) throw InvalidArgument("theorem3_ck: nu must be positive");

  Theorem3Bound out;
  out.condition_ok = smoothing_condition(M, sigma, sigma_s);
  if (!out.condition_ok) {
    out.c = out.c_conservative = out.log_term = kInf;
    return out;
  }
  const double s2 = sigma * sigma;
  const double ss2 = sigma_s * sigma_s;
  const double L2 = L * L;
  const double rest = s2 * (2.0 + 4.0 * std::sqrt(nu) + 4.0 * nu) + 2.0 * ss2 * ss2 * L2 + 2.0 * s2 * s2 * L2;
  out.log_term = 16.0 * ss2 / (1.0 - M * ss2) * std::log(2.0 / nu);
  out.log_term_negative = out.log_term < 0.0;
  out.c = rest + out.log_term;
  out.c_conservative = rest + std::max(out.log_term, 0.0);
  return out;
}

MtBound mt_bound(double M, double sigma) {
  check_nonneg(M, "mt_bound: M");
  check_nonneg(sigma, "mt_bound: sigma");
  return {M / (1.0 + M * sigma * sigma), M * sigma * sigma < 1.0};
}

StochasticDenoiser make_acdc_denoiser(const ScoreModel& model, const SchedulePoint& point, DenoiserConfig config) {
  config.validate();
  return [&model, point, config](const Signal& x, RandomStream& stream) {
    DenoiserStreams streams = DenoiserStreams::from(stream);
    return acdc_denoise(x, model, point, config, streams).z;
  };
}

PointSampler prior_sampler(const GaussianMixturePrior& prior, double sigma) {
  return [prior, sigma](RandomStream& stream) { return prior.sample(stream, sigma); };
}

PointSampler box_sampler(Index d, double lo, double hi) {
  if (d < 1 || !(hi > lo)) throw InvalidArgument("box_sampler: need d >= 1 and hi > lo");
  return [d, lo, hi](RandomStream& stream) {
    Signal x(d);
    for (Index i = 0; i < d; ++i) x[i] = lo + (hi - lo) * stream.uniform();
    return x;
  };
}

namespace {

RateTest finish(RateTest t, double nu) {
  t.violation_rate = t.samples > 0 ? static_cast<double>(t.violations) / t.samples : 0.0;
  t.ceiling = 2.0 * std::exp(-nu);
  t.tolerance = t.ceiling + 0.05;
  t.pass = t.violation_rate <= t.tolerance;
  return t;
}

}  // namespace

RateTest test_weak_nonexpansiveness(const StochasticDenoiser& denoiser, double epsilon, double delta, double nu,
                                    int n_pairs, const PointSampler& sampler, RandomStream& stream) {
  if (n_pairs < 100) throw InvalidArgument("test_weak_nonexpansiveness: need at least 100 pairs");
  RateTest t;
  t.samples = n_pairs;
  t.lhs.reserve(static_cast<std::size_t>(n_pairs));
  t.rhs.reserve(static_cast<std::size_t>(n_pairs));
  const RandomStream points = stream.substream("points");
  const RandomStream noise = stream.substream("denoise");
  for (int i = 0; i < n_pairs; ++i) {
    RandomStream ps = points.substream(static_cast<std::uint64_t>(i));
    const Signal x = sampler(ps);
    const Signal y = sampler(ps);
    RandomStream nx = noise.substream(2 * static_cast<std::uint64_t>(i));
    RandomStream ny = noise.substream(2 * static_cast<std::uint64_t>(i) + 1);
    const Signal rx = denoiser(x, nx) - x;
    const Signal ry = denoiser(y, ny) - y;
    const double lhs = (rx - ry).squaredNorm();
    const double rhs = epsilon * epsilon * (x - y).squaredNorm() + delta * delta;
    t.lhs.push_back(lhs);
    t.rhs.push_back(rhs);
    if (lhs > rhs) ++t.violations;
  }
  return finish(std::move(t), nu);
}

RateTest test_boundedness(const StochasticDenoiser& denoiser, double c, double nu, int n_points,
                          const PointSampler& sampler, RandomStream& stream) {
  if (n_points < 1) throw InvalidArgument("test_boundedness: need at least one point");
  RateTest t;
  t.samples = n_points;
  const RandomStream points = stream.substream("points");
  const RandomStream noise = stream.substream("denoise");
  for (int i = 0; i < n_points; ++i) {
    RandomStream ps = points.substream(static_cast<std::uint64_t>(i));
    RandomStream ns = noise.substream(static_cast<std::uint64_t>(i));
    const Signal x = sampler(ps);
    const double lhs = (denoiser(x, ns) - x).squaredNorm() / static_cast<double>(x.size());
    t.lhs.push_back(lhs);
    t.rhs.push_back(c * c);
    if (lhs > c * c) ++t.violations;
  }
  return finish(std::move(t), nu);
}

BallConvergence ball_convergence_detect(const std::vector<Signal>& trace, int tail, double r) {
  if (tail < 1 || static_cast<std::size_t>(tail) >= trace.size() + 1)
    throw InvalidArgument("ball_convergence_detect: tail must be in [1, trace length]");
  BallConvergence out;
  const std::size_t start = trace.size() - static_cast<std::size_t>(tail);
  for (std::size_t i = start; i < trace.size(); ++i) {
    if (!trace[i].allFinite()) {
      out.tail_diameter = kInf;
      return out;
    }
    for (std::size_t j = i + 1; j < trace.size(); ++j)
      out.tail_diameter = std::max(out.tail_diameter, (trace[i] - trace[j]).norm());
  }
  // points sampled exactly on a sphere of radius r land a rounding error above 2r
  out.converged = out.tail_diameter <= 2.0 * r * (1.0 + 1e-12);
  return out;
}

Quality psnr_mse(const Signal& est, const Signal& truth, double peak) {
  if (est.size() != truth.size()) throw InvalidArgument("psnr_mse: length mismatch");
  if (!(peak > 0.0)) throw InvalidArgument("psnr_mse: peak must be positive");
  Quality q;
  q.mse = (est - truth).squaredNorm() / static_cast<double>(est.size());
  q.psnr = q.mse > 0.0 ? std::min(kPsnrCap, 10.0 * std::log10(peak * peak / q.mse)) : kPsnrCap;
  return q;
}

Quality psnr_mse(const Signal& est, const Signal& truth) {
  const double peak = truth.size() > 0 ? truth.cwiseAbs().maxCoeff() : 0.0;
  return psnr_mse(est, truth, peak > 0.0 ? peak : 1.0);
}

BoundReport make_bound_report(const BoundInputs& in) {
  BoundReport rep;
  rep.inputs = in;
  rep.M_sigma_bound = mt_bound(in.M, in.sigma).value;
  rep.cond_smoothing = smoothing_condition(in.M, in.sigma, in.sigma_s);
  rep.notes.push_back(in.M_analytic ? "M analytic" : "M estimated from sampled Hessians");
  rep.thm2 = theorem2_constants(in.M, in.sigma, in.sigma_s, in.nu, in.d);
  rep.thm3 = theorem3_ck(in.M, in.sigma, in.sigma_s, in.nu, in.L);
  rep.cond_epsilon = rep.thm2.condition_ok && rep.thm2.epsilon < 1.0;
  if (rep.thm2.log_term_negative) rep.notes.push_back("log(2/nu) < 0: delta uses the clamped variant");
  if (!rep.cond_smoothing) rep.notes.push_back("sigma_s^2 + sigma^2 >= 1/M: constants undefined");
  if (in.mu > 0.0 && in.rho > 0.0 && rep.cond_epsilon) {
    rep.thm1 = theorem1_ball(rep.thm2.epsilon, rep.thm2.delta, in.mu, in.rho);
    rep.cond_step = rep.thm1->step_condition;
  } else if (!(in.mu > 0.0)) {
    rep.notes.push_back("fidelity not strongly convex: ball radius not available");
  }
  return rep;
}

namespace {

nlohmann::json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string bound_report_json(const BoundReport& r) {
  using nlohmann::json;
  json j;
  j["inputs"] = {{"M", num(r.inputs.M)},         {"M_analytic", r.inputs.M_analytic}, {"sigma", num(r.inputs.sigma)},
                 {"sigma_s", num(r.inputs.sigma_s)}, {"nu", num(r.inputs.nu)},          {"d", r.inputs.d},
                 {"mu", num(r.inputs.mu)},       {"rho", num(r.inputs.rho)},         {"L", num(r.inputs.L)}};
  j["M_sigma_bound"] = num(r.M_sigma_bound);
  j["theorem2"] = {{"epsilon", num(r.thm2.epsilon)},
                   {"delta", num(r.thm2.delta)},
                   {"delta_sq_verbatim", num(r.thm2.delta_sq)},
                   {"delta_sq_conservative", num(r.thm2.delta_sq_conservative)},
                   {"log_term_negative", r.thm2.log_term_negative}};
  if (r.thm1)
    j["theorem1"] = {{"epsilon_bar", num(r.thm1->epsilon_bar)},
                     {"delta_bar", num(r.thm1->delta_bar)},
                     {"r", num(r.thm1->r)}};
  else
    j["theorem1"] = nullptr;
  j["theorem3"] = {{"c", num(r.thm3.c)},
                   {"c_conservative", num(r.thm3.c_conservative)},
                   {"log_term", num(r.thm3.log_term)},
                   {"log_term_negative", r.thm3.log_term_negative}};
  j["conditions"] = {{"smoothing", r.cond_smoothing}, {"epsilon_lt_1", r.cond_epsilon}, {"step", r.cond_step}};
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

}  // namespace acdc
