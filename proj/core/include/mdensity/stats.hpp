#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mdensity {

/// sup_x |F_n(x) - cdf(x)| for the empirical CDF of `samples`.
double ks_1d(std::span<const double> samples, const std::function<double(double)>& cdf);

struct KsTwoSample {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsTwoSample ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct AutocorrEss {
  std::vector<double> autocorrelation;  // rho_0 .. rho_cutoff
  double ess = 0.0;
  double integrated_time = 1.0;
  bool degenerate = false;  // zero variance; ess is reported as 1
};

/// Autocorrelation via FFT and the initial positive sequence ESS estimate.
AutocorrEss autocorr_ess(std::span<const double> series);

double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);

/// E|Z| for Z ~ N(0, s^2 I_d): s * sqrt(2) * Gamma((d+1)/2) / Gamma(d/2).
double chi_mean(double scale, int d);

}  // namespace mdensity
