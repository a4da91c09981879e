#include "acdc/priors/gmm.hpp"

#include "acdc/core/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace acdc {

namespace {

/// ||H||_2 where H = -a I + C and C is the responsibility-weighted covariance
/// of the component scores g_i. C has rank < m, so for d >= m its spectrum is
/// read off an m x m Gram matrix.
double hessian_norm(const GaussianMixturePrior& prior, const Signal& x, double sigma) {
  const Index m = prior.components();
  const Index d = prior.dim();
  const Eigen::VectorXd gamma = prior.responsibilities(x, sigma);
  Eigen::MatrixXd g(d, m);
  double a = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double s = prior.stds()[static_cast<std::size_t>(i)];
    const double v = s * s + sigma * sigma;
    g.col(i) = (prior.mean_of(i) - x) / v;
    a += gamma[i] / v;
  }
  if (d <= m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prior.hessian(x, sigma), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  const Eigen::VectorXd gbar = g * gamma;
  g.colwise() -= gbar;
  const Eigen::VectorXd sw = gamma.cwiseSqrt();
  const Eigen::MatrixXd gram = sw.asDiagonal() * (g.transpose() * g) * sw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
  // C also has the eigenvalue 0 on the complement of span{g_i - gbar}.
  return std::max(std::abs(lmax - a), a);
}

}  // namespace

GaussianMixturePrior::GaussianMixturePrior(std::vector<double> weights, Eigen::MatrixXd means,
                                           std::vector<double> stds)
    : weights_(std::move(weights)), means_(std::move(means)), stds_(std::move(stds)) {
  const auto m = weights_.size();
  if (m == 0) throw InvalidArgument("GaussianMixturePrior: at least one component required");
  if (static_cast<std::size_t>(means_.rows()) != m || stds_.size() != m)
    throw InvalidArgument("GaussianMixturePrior: weights, means and stds disagree on m");
  if (means_.cols() < 1) throw InvalidArgument("GaussianMixturePrior: dimension must be >= 1");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(weights_[i] > 0.0)) throw InvalidArgument("GaussianMixturePrior: weights must be positive");
    if (!(stds_[i] > 0.0)) throw InvalidArgument("GaussianMixturePrior: stds must be positive");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("GaussianMixturePrior: weights must sum to 1");
  if (!means_.allFinite()) throw InvalidArgument("GaussianMixturePrior: means must be finite");

  log_weights_.resize(m);
  std::transform(weights_.begin(), weights_.end(), log_weights_.begin(),
                 [](double w) { return std::log(w); });
  smoothness_ = smoothness_constant(*this).value;
}

GaussianMixturePrior GaussianMixturePrior::from_spec(const PriorSpec& spec, Index dim) {
  const auto m = static_cast<Index>(spec.weights.size());
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(m, dim);
  if (!spec.means.empty()) {
    if (static_cast<Index>(spec.means.size()) != m)
      throw InvalidArgument("prior: one mean per component required");
    for (Index i = 0; i < m; ++i) {
      const auto& row = spec.means[static_cast<std::size_t>(i)];
      if (static_cast<Index>(row.size()) != dim) throw InvalidArgument("prior: mean length != dim");
      for (Index j = 0; j < dim; ++j) means(i, j) = row[static_cast<std::size_t>(j)];
    }
  }
  return GaussianMixturePrior(spec.weights, std::move(means), spec.stds);
}

GaussianMixturePrior GaussianMixturePrior::single(const Signal& mean, double std) {
  return GaussianMixturePrior({1.0}, mean.transpose(), {std});
}

Signal GaussianMixturePrior::prior_mean() const {
  Signal out = Signal::Zero(dim());
  for (Index i = 0; i < components(); ++i) out += weights_[static_cast<std::size_t>(i)] * mean_of(i);
  return out;
}

Eigen::VectorXd GaussianMixturePrior::responsibilities(const Signal& x, double sigma) const {
  const Index m = components();
  const double d = static_cast<double>(dim());
  Eigen::VectorXd logp(m);
  for (Index i = 0; i < m; ++i) {
    const double s = stds_[static_cast<std::size_t>(i)];
    const double v = s * s + sigma * sigma;
    logp[i] = log_weights_[static_cast<std::size_t>(i)] - 0.5 * d * std::log(v) -
              0.5 * (x - means_.row(i).transpose()).squaredNorm() / v;
  }
  const double top = logp.maxCoeff();
  Eigen::VectorXd gamma = (logp.array() - top).exp();
  return gamma / gamma.sum();
}

double GaussianMixturePrior::log_density(const Signal& x, double sigma) const {
  const Index m = components();
  const double d = static_cast<double>(dim());
  Eigen::VectorXd logp(m);
  for (Index i = 0; i < m; ++i) {
    const double s = stds_[static_cast<std::size_t>(i)];
    const double v = s * s + sigma * sigma;
    logp[i] = log_weights_[static_cast<std::size_t>(i)] -
              0.5 * d * std::log(2.0 * std::numbers::pi * v) -
              0.5 * (x - means_.row(i).transpose()).squaredNorm() / v;
  }
  const double top = logp.maxCoeff();
  return top + std::log((logp.array() - top).exp().sum());
}

Signal GaussianMixturePrior::score(const Signal& x, double sigma) const {
  const Eigen::VectorXd gamma = responsibilities(x, sigma);
  Signal out = Signal::Zero(dim());
  for (Index i = 0; i < components(); ++i) {
    const double s = stds_[static_cast<std::size_t>(i)];
    out += gamma[i] / (s * s + sigma * sigma) * (means_.row(i).transpose() - x);
  }
  return out;
}

Signal GaussianMixturePrior::posterior_mean(const Signal& x, double sigma) const {
  const Eigen::VectorXd gamma = responsibilities(x, sigma);
  Signal out = Signal::Zero(dim());
  for (Index i = 0; i < components(); ++i) {
    const double s2 = stds_[static_cast<std::size_t>(i)] * stds_[static_cast<std::size_t>(i)];
    const Signal mu = means_.row(i).transpose();
    out += gamma[i] * (mu + s2 / (s2 + sigma * sigma) * (x - mu));
  }
  return out;
}

Eigen::MatrixXd GaussianMixturePrior::hessian(const Signal& x, double sigma) const {
  const Index d = dim();
  const Eigen::VectorXd gamma = responsibilities(x, sigma);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  Signal gbar = Signal::Zero(d);
  for (Index i = 0; i < components(); ++i) {
    const double s = stds_[static_cast<std::size_t>(i)];
    const double v = s * s + sigma * sigma;
    const Signal g = (means_.row(i).transpose() - x) / v;
    h.diagonal().array() -= gamma[i] / v;
    h.noalias() += gamma[i] * g * g.transpose();
    gbar += gamma[i] * g;
  }
  h.noalias() -= gbar * gbar.transpose();
  return h;
}

Signal GaussianMixturePrior::sample(RandomStream& stream, double sigma) const {
  double u = stream.uniform();
  Index pick = components() - 1;
  for (Index i = 0; i < components(); ++i) {
    u -= weights_[static_cast<std::size_t>(i)];
    if (u <= 0.0) {
      pick = i;
      break;
    }
  }
  const double s = stds_[static_cast<std::size_t>(pick)];
  Signal x = mean_of(pick) + s * stream.normal_vector(dim());
  if (sigma > 0.0) x += sigma * stream.normal_vector(dim());
  return x;
}

std::optional<double> GaussianMixturePrior::smoothness() const { return smoothness_; }

Signal gmm_score(const GaussianMixturePrior& prior, const Signal& x, double sigma) {
  if (sigma < 0.0) throw InvalidArgument("gmm_score: sigma must be >= 0");
  return prior.score(x, sigma);
}

Signal mmse_denoise_oracle(const GaussianMixturePrior& prior, const Signal& x, double sigma) {
  if (sigma < 0.0) throw InvalidArgument("mmse_denoise_oracle: sigma must be >= 0");
  return prior.posterior_mean(x, sigma);
}

SmoothnessEstimate smoothness_constant(const GaussianMixturePrior& prior) {
  SmoothnessEstimate est;
  const auto& stds = prior.stds();
  const double s_min = *std::min_element(stds.begin(), stds.end());
  const double s_max = *std::max_element(stds.begin(), stds.end());
  if (prior.components() == 1) {
    est.value = 1.0 / (s_min * s_min);
    est.analytic = true;
    est.method = "analytic 1/s^2";
    return est;
  }

  double best = 1.0 / (s_min * s_min);
  int count = 0;
  auto probe = [&](const Signal& x) {
    best = std::max(best, hessian_norm(prior, x, 0.0));
    ++count;
  };
  const Index m = prior.components();
  for (Index i = 0; i < m; ++i) {
    probe(prior.mean_of(i));
    for (Index j = i + 1; j < m; ++j) {
      const Signal a = prior.mean_of(i);
      const Signal b = prior.mean_of(j);
      const double len = (b - a).norm();
      if (len == 0.0) continue;
      const double ext = 3.0 * s_max / len;
      for (int t = 0; t <= 20; ++t) {
        const double lambda = -ext + (1.0 + 2.0 * ext) * t / 20.0;
        probe(a + lambda * (b - a));
      }
    }
  }
  RandomStream stream(0x5EEDull);
  for (int n = 0; n < 2000; ++n) probe(prior.sample(stream));

  est.value = best;
  est.analytic = false;
  est.samples = count;
  est.method = "max Hessian spectral norm over mean segments and 2000 prior draws";
  return est;
}

}  // namespace acdc
