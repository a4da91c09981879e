#include "acdc/denoiser/acdc_denoiser.hpp"

#include "acdc/core/errors.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace acdc {

void DenoiserConfig::validate() const {
  if (dc_steps < 0) throw InvalidArgument("denoiser: J must be >= 0");
  if (ode_steps < 1) throw InvalidArgument("denoiser: ode_steps must be >= 1");
}

Signal ac_step(const Signal& z_tilde, double sigma, RandomStream& stream, bool zero_noise) {
  if (sigma < 0.0) throw InvalidArgument("ac_step: sigma must be >= 0");
  if (zero_noise || sigma == 0.0) return z_tilde;
  return z_tilde + sigma * stream.normal_vector(z_tilde.size());
}

Signal dc_step(const Signal& z_ac, const ScoreModel& model, double sigma, double sigma_s, double eta,
               int steps, RandomStream& stream, bool zero_noise, std::vector<Signal>* path) {
  if (steps < 0) throw InvalidArgument("dc_step: J must be >= 0");
  if (steps == 0) return z_ac;
  if (!(sigma_s > 0.0) || !(eta > 0.0)) throw InvalidArgument("dc_step: sigma_s and eta must be positive");

  const double pull = 1.0 / (sigma_s * sigma_s);
  const double kick = std::sqrt(2.0 * eta);
  Signal w = z_ac;
  if (path) path->push_back(w);
  for (int j = 0; j < steps; ++j) {
    Signal drift = pull * (z_ac - w) + model.score(w, sigma);
    w += eta * drift;
    if (!zero_noise) w += kick * stream.normal_vector(w.size());
    require_finite(w, "dc_step", j);
    if (path) path->push_back(w);
  }
  return w;
}

Signal tweedie_denoise(const Signal& z, const ScoreModel& model, double sigma) {
  if (sigma < 0.0) throw InvalidArgument("tweedie_denoise: sigma must be >= 0");
  if (sigma == 0.0) return z;
  return z + sigma * sigma * model.score(z, sigma);
}

Signal ode_denoise(const Signal& z, const ScoreModel& model, double sigma_start, int steps,
                   OdeIntegrator integrator) {
  if (steps < 1) throw InvalidArgument("ode_denoise: steps must be >= 1");
  if (sigma_start < 0.0) throw InvalidArgument("ode_denoise: sigma_start must be >= 0");
  if (sigma_start <= kOdeSigmaFloor) return tweedie_denoise(z, model, sigma_start);

  const double t0 = sigma_start * sigma_start;
  const double t1 = kOdeSigmaFloor * kOdeSigmaFloor;
  const double dt = (t1 - t0) / steps;  // negative
  auto drift = [&](const Signal& state, double t) -> Signal { return -0.5 * model.score(state, std::sqrt(t)); };

  Signal state = z;
  for (int n = 0; n < steps; ++n) {
    const double t = t0 + n * dt;
    const double t_next = (n + 1 == steps) ? t1 : t + dt;
    const Signal k1 = drift(state, t);
    if (integrator == OdeIntegrator::Euler) {
      state += (t_next - t) * k1;
    } else {
      const Signal pred = state + (t_next - t) * k1;
      state += 0.5 * (t_next - t) * (k1 + drift(pred, t_next));
    }
    require_finite(state, "ode_denoise", n);
  }
  return tweedie_denoise(state, model, kOdeSigmaFloor);
}

DenoiseResult acdc_denoise(const Signal& z_tilde, const ScoreModel& model, const SchedulePoint& point,
                           const DenoiserConfig& config, DenoiserStreams& streams) {
  config.validate();
  DenoiseResult res;
  auto& tr = res.trace;
  tr.z_tilde = z_tilde;
  tr.point = point;
  tr.dc_steps = config.dc_steps;
  tr.zero_noise = config.zero_noise;

  if (auto m = model.smoothness(); m && config.dc_steps > 0) {
    const double m_sigma = *m / (1.0 + *m * point.sigma * point.sigma);
    tr.dc_condition_ok = point.sigma_s * point.sigma_s < 1.0 / m_sigma;
    if (!tr.dc_condition_ok)
      spdlog::debug("dc_step: sigma_s^2 = {:.4g} violates sigma_s^2 < 1/M_sigma = {:.4g}",
                    point.sigma_s * point.sigma_s, 1.0 / m_sigma);
  }

  tr.z_ac = ac_step(z_tilde, point.sigma, streams.ac, config.zero_noise);
  tr.z_dc = dc_step(tr.z_ac, model, point.sigma, point.sigma_s, point.eta, config.dc_steps, streams.dc,
                    config.zero_noise, config.keep_dc_path ? &tr.dc_path : nullptr);
  tr.z_out = config.backend == DenoiserBackend::Tweedie
                 ? tweedie_denoise(tr.z_dc, model, point.sigma)
                 : ode_denoise(tr.z_dc, model, point.sigma, config.ode_steps, config.ode_integrator);
  require_finite(tr.z_out, "acdc_denoise");
  res.z = tr.z_out;
  return res;
}

double kl_gap(const Signal& z_tilde, const Signal& clean_reference, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("kl_gap: sigma must be positive");
  if (z_tilde.size() != clean_reference.size()) throw InvalidArgument("kl_gap: length mismatch");
  return (z_tilde - clean_reference).squaredNorm() / (2.0 * sigma * sigma);
}

}  // namespace acdc
