#include "acdc/core/schedule.hpp"

#include "acdc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acdc {

void NoiseSchedule::validate() const {
  if (kind == ScheduleKind::Constant) {
    // sigma = 0 switches the denoiser off; the DC chain then has no step size.
    if (!(sigma_max >= 0.0)) throw InvalidArgument("schedule: constant sigma must be >= 0");
    if (sigma_max == 0.0 && dc_steps > 0) throw InvalidArgument("schedule: sigma = 0 requires J = 0");
  } else {
    if (!(sigma_max > 0.0) || !(sigma_min > 0.0))
      throw InvalidArgument("schedule: sigma_max and sigma_min must be positive");
    if (sigma_min > sigma_max) throw InvalidArgument("schedule: sigma_min exceeds sigma_max");
  }
  if (window < 1) throw InvalidArgument("schedule: window W must be >= 1");
  if (tail < 0) throw InvalidArgument("schedule: tail must be >= 0");
  if (dc_steps < 0) throw InvalidArgument("schedule: dc_steps J must be >= 0");
  if (!(eta_coeff > 0.0)) throw InvalidArgument("schedule: eta_coeff must be positive");
  if (!(sigma_s_coeff > 0.0)) throw InvalidArgument("schedule: sigma_s_coeff must be positive");
  if (!(eta_prob > 0.0) || eta_prob > 1.0)
    throw InvalidArgument("schedule: eta_prob must lie in (0, 1]");
}

SchedulePoint schedule_at(const NoiseSchedule& s, int k) {
  if (k < 0 || k > s.max_iters())
    throw OutOfRange("schedule_at: iteration " + std::to_string(k) + " outside [0, " +
                     std::to_string(s.max_iters()) + "]");
  SchedulePoint p;
  if (s.kind == ScheduleKind::Constant) {
    p.sigma = s.sigma_max;
  } else {
    const double decay = (s.sigma_max - s.sigma_min) * static_cast<double>(k) / s.window;
    p.sigma = std::max(s.sigma_min, s.sigma_max - decay);
  }
  p.eta = s.eta_coeff * p.sigma;
  p.sigma_s = s.sigma_s_rule == SigmaSRule::InvSqrt ? s.sigma_s_coeff / std::sqrt(p.sigma)
                                                    : s.sigma_s_coeff * p.sigma;
  return p;
}

double nu_at(double eta_prob, int k) {
  if (k < 1) throw OutOfRange("nu_at: k must be >= 1");
  // Any positive eta_prob is accepted here; NoiseSchedule::validate restricts it to (0, 1].
  if (!(eta_prob > 0.0)) throw InvalidArgument("nu_at: eta_prob must be positive");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return std::log(2.0 * pi2 / (6.0 * eta_prob)) + 2.0 * std::log(static_cast<double>(k));
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::Linear ? "linear" : "constant";
}

std::string to_string(SigmaSRule rule) {
  return rule == SigmaSRule::InvSqrt ? "inv_sqrt" : "proportional";
}

}  // namespace acdc
