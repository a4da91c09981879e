#pragma once

#include "acdc/core/config.hpp"
#include "acdc/core/random.hpp"
#include "acdc/core/schedule.hpp"
#include "acdc/priors/score_model.hpp"

#include <vector>

namespace acdc {

struct DenoiserConfig {
  int dc_steps = 10;  ///< J
  /// Replace every Gaussian draw by 0. Test mode only; recorded in traces.
  bool zero_noise = false;
  DenoiserBackend backend = DenoiserBackend::Tweedie;
  int ode_steps = 10;
  OdeIntegrator ode_integrator = OdeIntegrator::Euler;
  bool keep_dc_path = false;

  void validate() const;
};

/// AC and DC noise come from separate streams so that changing J leaves the
/// AC draws untouched (common random numbers across DC ablations).
struct DenoiserStreams {
  RandomStream ac;
  RandomStream dc;

  static DenoiserStreams from(const RandomStream& parent) {
    return {parent.substream("ac"), parent.substream("dc")};
  }
};

struct DenoiseTrace {
  Signal z_tilde;
  Signal z_ac;
  Signal z_dc;
  Signal z_out;
  SchedulePoint point;
  int dc_steps = 0;
  bool zero_noise = false;
  /// sigma_s^2 < 1 / M_sigma held (always true when M is unknown).
  bool dc_condition_ok = true;
  std::vector<Signal> dc_path;
};

/// z + sigma n.
Signal ac_step(const Signal& z_tilde, double sigma, RandomStream& stream, bool zero_noise = false);

/// J Langevin steps on log p(z_sigma | z_ac) approximated by
/// score(w, sigma) - (w - z_ac) / sigma_s^2, started at w = z_ac.
/// Throws DivergenceError naming the step if an iterate stops being finite.
Signal dc_step(const Signal& z_ac, const ScoreModel& model, double sigma, double sigma_s, double eta,
               int steps, RandomStream& stream, bool zero_noise = false,
               std::vector<Signal>* path = nullptr);

/// z + sigma^2 score(z, sigma).
Signal tweedie_denoise(const Signal& z, const ScoreModel& model, double sigma);

/// Probability-flow ODE of the variance-exploding process, written in
/// t = sigma^2: dz/dt = -score(z, sqrt t) / 2. Integrated on a uniform t-grid
/// from sigma_start^2 down to kOdeSigmaFloor^2, followed by an exact Tweedie
/// step from the floor to zero.
Signal ode_denoise(const Signal& z, const ScoreModel& model, double sigma_start, int steps,
                   OdeIntegrator integrator = OdeIntegrator::Euler);

inline constexpr double kOdeSigmaFloor = 1e-3;

struct DenoiseResult {
  Signal z;
  DenoiseTrace trace;
};

/// Full AC -> DC -> (Tweedie | ODE) pipeline at one schedule point.
DenoiseResult acdc_denoise(const Signal& z_tilde, const ScoreModel& model, const SchedulePoint& point,
                           const DenoiserConfig& config, DenoiserStreams& streams);

/// ||z_tilde - clean||^2 / (2 sigma^2), the KL divergence between
/// N(z_tilde, sigma^2 I) and N(clean, sigma^2 I).
double kl_gap(const Signal& z_tilde, const Signal& clean_reference, double sigma);

}  // namespace acdc
