#pragma once

#include "acdc/core/random.hpp"
#include "acdc/priors/score_model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace acdc {

using PointSampler = std::function<Signal(RandomStream&)>;

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> counts;
};

/// Output of the empirical smoothness and coercivity probes.
struct SmoothnessReport {
  std::optional<double> M;             ///< smoothness constant of grad log p_data, if known
  std::optional<double> M_sigma_bound;  ///< M / (1 + M sigma^2)
  double sigma = 0.0;
  double empirical_lipschitz = 0.0;    ///< max sampled ||s(x1)-s(x2)|| / ||x1-x2||
  std::vector<double> ratios;
  Histogram histogram;
  int resampled = 0;  ///< degenerate pairs (x1 == x2) drawn again

  /// (||c x||^2, <c x, -score(c x, 0)>) pairs
  std::vector<std::pair<double, double>> coercivity_samples;
  double coercivity_slope = 0.0;
  double coercivity_intercept = 0.0;
};

/// Samples n_pairs point pairs and records the score difference ratio.
/// Odd-numbered pairs are local: x2 = x1 + 0.05 * n so the ratio probes the
/// Hessian as well as the global spread.
SmoothnessReport empirical_smoothness(const ScoreModel& model, double sigma, int n_pairs,
                                      RandomStream& stream, const PointSampler& sampler);

/// Coercivity scatter at sigma = 0 over every (scale, base point) combination.
SmoothnessReport empirical_coercivity(const ScoreModel& model, std::span<const double> scales,
                                      std::span<const Signal> base_points);

Histogram make_histogram(std::span<const double> values, int bins);

/// inf_x ||grad log p_data(x)|| over the sampler's draws and any extra points.
double min_score_norm(const ScoreModel& model, RandomStream& stream, const PointSampler& sampler,
                      int n_samples, std::span<const Signal> extra_points = {});

}  // namespace acdc
