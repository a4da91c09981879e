#pragma once

#include "acdc/core/config.hpp"
#include "acdc/core/random.hpp"
#include "acdc/priors/score_model.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace acdc {

/// Mixture of isotropic Gaussians N(mu_i, s_i^2 I) with weights w_i.
///
/// Smoothing by N(0, sigma^2 I) keeps the family closed: p_sigma is the same
/// mixture with variances s_i^2 + sigma^2, so the score, the posterior mean
/// and the Hessian are exact.
class GaussianMixturePrior final : public ScoreModel {
public:
  /// `means` is m x d, one component per row.
  GaussianMixturePrior(std::vector<double> weights, Eigen::MatrixXd means, std::vector<double> stds);

  static GaussianMixturePrior from_spec(const PriorSpec& spec, Index dim);
  static GaussianMixturePrior single(const Signal& mean, double std);

  Index dim() const override { return means_.cols(); }
  Index components() const { return means_.rows(); }

  const std::vector<double>& weights() const { return weights_; }
  const Eigen::MatrixXd& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }
  Signal mean_of(Index i) const { return means_.row(i).transpose(); }
  Signal prior_mean() const;

  double log_density(const Signal& x, double sigma) const;
  /// Posterior component probabilities under the smoothed mixture.
  Eigen::VectorXd responsibilities(const Signal& x, double sigma) const;
  Signal score(const Signal& x, double sigma) const override;
  /// E[x0 | x0 + sigma n = x], computed component-wise (no score involved).
  Signal posterior_mean(const Signal& x, double sigma) const;
  /// Hessian of log p_sigma at x.
  Eigen::MatrixXd hessian(const Signal& x, double sigma) const;

  /// Draw x0 ~ p_data, or x0 + sigma n when sigma > 0.
  Signal sample(RandomStream& stream, double sigma = 0.0) const;

  /// Analytic M for a single component, otherwise the cached sampled estimate.
  std::optional<double> smoothness() const override;

private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  Eigen::MatrixXd means_;
  std::vector<double> stds_;
  double smoothness_ = 0.0;
};

/// grad log p_sigma(x); log-sum-exp stabilised.
Signal gmm_score(const GaussianMixturePrior& prior, const Signal& x, double sigma);

/// Closed-form MMSE denoiser sum_i gamma_i (mu_i + s_i^2/(s_i^2+sigma^2)(x - mu_i)).
/// Independent of gmm_score; used as the oracle for Tweedie denoising.
Signal mmse_denoise_oracle(const GaussianMixturePrior& prior, const Signal& x, double sigma);

struct SmoothnessEstimate {
  double value = 0.0;
  bool analytic = false;
  int samples = 0;
  std::string method;
};

/// M = sup_x ||Hessian log p_data(x)||_2.
///
/// One component: 1/s^2 exactly. Several components: the maximum spectral norm
/// of the exact Hessian over a deterministic grid (21 points on every segment
/// between two means extended by 3 s_max beyond each end, plus 2000 prior
/// draws from a fixed stream), floored at max_i 1/s_i^2 which the far field
/// attains.
SmoothnessEstimate smoothness_constant(const GaussianMixturePrior& prior);

}  // namespace acdc
