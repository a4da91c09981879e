#pragma once

#include <string>

namespace acdc {

enum class ScheduleKind {
  Linear,    ///< sigma_k = max(sigma_min, sigma_max - (sigma_max - sigma_min) k / W)
  Constant,  ///< sigma_k = sigma_max for every k (frozen schedule)
};

enum class SigmaSRule {
  InvSqrt,       ///< sigma_s = coeff / sqrt(sigma)
  Proportional,  ///< sigma_s = coeff * sigma
};

/// Per-iteration noise levels of the AC-DC denoiser.
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::Linear;
  double sigma_max = 10.0;
  double sigma_min = 0.1;
  int window = 100;  ///< W, the decay window
  int tail = 10;     ///< iterations after the window; K = W + tail
  int dc_steps = 10;  ///< J
  double eta_coeff = 5e-4;
  SigmaSRule sigma_s_rule = SigmaSRule::InvSqrt;
  double sigma_s_coeff = 0.1;
  double eta_prob = 0.05;  ///< confidence parameter of the high-probability bounds

  int max_iters() const noexcept { return window + tail; }

  /// Throws InvalidArgument when a field is out of its domain.
  void validate() const;
};

struct SchedulePoint {
  double sigma = 0.0;
  double sigma_s = 0.0;
  double eta = 0.0;
};

/// Noise levels at iteration k, 0 <= k <= K. Throws OutOfRange otherwise.
SchedulePoint schedule_at(const NoiseSchedule& s, int k);

/// nu_k = ln(2 pi^2 / (6 eta_prob)) + 2 ln k for k >= 1.
double nu_at(double eta_prob, int k);
inline double nu_at(const NoiseSchedule& s, int k) { return nu_at(s.eta_prob, k); }

std::string to_string(ScheduleKind kind);
std::string to_string(SigmaSRule rule);

}  // namespace acdc
