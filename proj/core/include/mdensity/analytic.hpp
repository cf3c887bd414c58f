#pragma once

#include <span>
#include <vector>

#include "mdensity/noise.hpp"

namespace mdensity {

/// Closed-form M-density of an isotropic Gaussian-mixture prior under a
/// Gaussian multimeasurement noise model.
///
/// Each component k with mean mu_k and std s_k is treated as an extra
/// "measurement" y_0 = mu_k with noise level sigma_0 = s_k, so that for
/// the index set {0..M}:
///
///   P_k     = prod_{m=0}^M sigma_m^2
///   Z_k     = P_k * sum_{m=0}^M sigma_m^-2
///   Sigma_k = P_k * Z_k
///   ytilde  = sum_{m=0}^M y_m * prod_{l != m} sigma_l^2
///
///   log p_k(y) = -sum_m |y_m|^2 / (2 sigma_m^2) + |ytilde|^2 / (2 Sigma_k)
///                - d * log((2 pi)^{M/2} sqrt(Z_k))
///
/// and the mixture is log-sum-exp over log w_k + log p_k(y).
class GaussianMDensity {
 public:
  GaussianMDensity(GaussianMixturePrior prior, NoiseModel noise);

  const GaussianMixturePrior& prior() const { return prior_; }
  const NoiseModel& noise() const { return noise_; }

  struct Component {
    double sigma0;
    Vec mu;
    double log_weight;
    double prod_var;                   // P_k
    double z;                          // Z_k
    double big_sigma;                  // Sigma_k
    double log_partition;              // d * log((2 pi)^{M/2} sqrt(Z_k))
    double mu_coef;                    // prod_{l != 0} sigma_l^2
    std::vector<double> channel_coef;  // prod_{l != m} sigma_l^2, m = 1..M
  };
  const std::vector<Component>& components() const { return components_; }

  /// ytilde for component k.
  Vec tilde_y(int k, const MultiY& y) const;

  /// Normalized log density of component k alone (no weight).
  double component_log_density(int k, const MultiY& y) const;
  /// Posterior responsibilities r_k(y) proportional to w_k p_k(y).
  std::vector<double> responsibilities(const MultiY& y) const;

  double log_density(const MultiY& y) const;
  Vec score(const MultiY& y) const;
  /// E[X | y] = sum_k r_k(y) * ytilde_k / Z_k.
  Vec bayes_estimate(const MultiY& y) const;

  /// Adapter for the generic estimator and sampler code.
  ScoreSource score_source() const;

 private:
  GaussianMixturePrior prior_;
  NoiseModel noise_;
  std::vector<Component> components_;
};

double log_mdensity_gaussian(const GaussianMDensity& model, const MultiY& y);
Vec score_gaussian(const GaussianMDensity& model, const MultiY& y);
Vec bayes_estimate_gaussian(const GaussianMDensity& model, const MultiY& y);

/// E|x - xhat(y)|^2 for a 1D prior, by Simpson quadrature over the
/// precision-weighted channel mean (a sufficient statistic). Uses E x^2 - E xhat^2.
double bayes_risk_1d(const GaussianMDensity& model, int nodes = 20001);

/// Poisson multimeasurement kernel with an Exp(1) prior on the rate:
///   p(y) = (sum y)! / prod(y_l!) * (M+1)^{-1 - sum y}.
/// Counts are passed as reals and must be non-negative integers.
class PoissonExpMDensity {
 public:
  explicit PoissonExpMDensity(int M);
  int M() const { return M_; }

 private:
  int M_;
};

double poisson_log_mdensity(const PoissonExpMDensity& model, std::span<const double> y);
/// (sum y + 1) / (M + 1).
double poisson_estimate(const PoissonExpMDensity& model, std::span<const double> y);
/// (y_m + 1) p(y + 1_m) / p(y), computed from the log density.
double poisson_robbins_estimate(const PoissonExpMDensity& model, std::span<const double> y, int m);

}  // namespace mdensity
