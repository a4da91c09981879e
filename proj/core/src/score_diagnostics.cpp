#include "acdc/priors/score_diagnostics.hpp"

#include "acdc/core/errors.hpp"

#include <algorithm>
#include <limits>

namespace acdc {

Histogram make_histogram(std::span<const double> values, int bins) {
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(std::max(bins, 1)), 0);
  if (values.empty()) return h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.lo = *lo;
  h.hi = *hi;
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - h.lo) / width) : 0;
    b = std::min(b, h.counts.size() - 1);
    ++h.counts[b];
  }
  return h;
}

SmoothnessReport empirical_smoothness(const ScoreModel& model, double sigma, int n_pairs,
                                      RandomStream& stream, const PointSampler& sampler) {
  if (n_pairs < 1) throw InvalidArgument("empirical_smoothness: n_pairs must be >= 1");
  if (sigma < 0.0) throw InvalidArgument("empirical_smoothness: sigma must be >= 0");
  SmoothnessReport rep;
  rep.sigma = sigma;
  rep.M = model.smoothness();
  if (rep.M) rep.M_sigma_bound = *rep.M / (1.0 + *rep.M * sigma * sigma);

  rep.ratios.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    Signal x1 = sampler(stream);
    Signal x2 = (i % 2 == 0) ? sampler(stream) : Signal(x1 + 0.05 * stream.normal_vector(x1.size()));
    while ((x1 - x2).norm() == 0.0) {
      ++rep.resampled;
      x2 = sampler(stream);
    }
    const double num = (model.score(x1, sigma) - model.score(x2, sigma)).norm();
    rep.ratios.push_back(num / (x1 - x2).norm());
  }
  rep.empirical_lipschitz = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.histogram = make_histogram(rep.ratios, 20);
  return rep;
}

SmoothnessReport empirical_coercivity(const ScoreModel& model, std::span<const double> scales,
                                      std::span<const Signal> base_points) {
  if (scales.empty()) throw InvalidArgument("empirical_coercivity: scales must be non-empty");
  SmoothnessReport rep;
  rep.M = model.smoothness();
  for (const Signal& x : base_points) {
    for (double c : scales) {
      const Signal cx = c * x;
      rep.coercivity_samples.emplace_back(cx.squaredNorm(), -cx.dot(model.score(cx, 0.0)));
    }
  }
  const auto n = static_cast<double>(rep.coercivity_samples.size());
  if (n == 0) return rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [a, b] : rep.coercivity_samples) {
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = n * sxx - sx * sx;
  if (den > 0.0) {
    rep.coercivity_slope = (n * sxy - sx * sy) / den;
    rep.coercivity_intercept = (sy - rep.coercivity_slope * sx) / n;
  } else if (sxx > 0.0) {
    rep.coercivity_slope = sxy / sxx;
  }
  return rep;
}

double min_score_norm(const ScoreModel& model, RandomStream& stream, const PointSampler& sampler,
                      int n_samples, std::span<const Signal> extra_points) {
  double best = std::numeric_limits<double>::infinity();
  for (const Signal& x : extra_points) best = std::min(best, model.score(x, 0.0).norm());
  for (int i = 0; i < n_samples; ++i) best = std::min(best, model.score(sampler(stream), 0.0).norm());
  return best;
}

}  // namespace acdc
