#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "mdensity/noise.hpp"
#include "mdensity/rng.hpp"

namespace mdensity {

/// Estimator of x from y through channel m.
using ChannelEstimator = std::function<Vec(const MultiY&, int)>;
/// Map R^{Md} -> R^{Md}; output channel m is the channel-m estimate of x.
using NuFn = std::function<Vec(const MultiY&)>;

/// Diagonal Gaussian q(z | y).
struct LatentGaussian {
  Vec mu;
  Vec logvar;
};

/// Function handles for the energy parametrizations.
struct EnergyHandles {
  NuFn nu;
  /// Metaencoder h(y, nu); treated as 0 when absent.
  std::function<double(const MultiY&, const Vec&)> h;
  std::function<LatentGaussian(const MultiY&)> encoder;
  std::function<Vec(const Vec&)> decoder;
};

/// Channel estimator induced by a score source: y_m + sigma_m^2 score_m(y).
ChannelEstimator estimator_from_score(ScoreSource src, NoiseModel noise);

/// |x - est(y, m)|^2
double neb_loss_channel(const ChannelEstimator& est, const Vec& x, const MultiY& y, int m);
/// Mean of the M channel losses.
double neb_loss(const ChannelEstimator& est, const Vec& x, const MultiY& y);

/// sum_m |score_m(y) + (y_m - x) / sigma_m^2|^2
double mdsm_loss(const ScoreFn& score, const Vec& x, const MultiY& y, const NoiseModel& noise);

/// (1/M) |x (x) M - nu(y)|^2
double mdae_loss(const NuFn& nu, const Vec& x, const MultiY& y);
double mdae_loss(const Vec& nu_value, const Vec& x, int M);

/// Score (nu(y) - y) / sigma_m^2, blockwise. Not a gradient field in general, so
/// the returned source carries no log density.
ScoreSource score_from_nu(NuFn nu, NoiseModel noise);

/// (1/(2 sigma^2)) |y - nu(y)|^2 + h(y, nu(y))
double mem2_energy(const EnergyHandles& handles, const MultiY& y, double sigma);

/// KL(N(mu, diag(exp(logvar))) || N(0, I)).
double kl_diag_gaussian(const Vec& mu, const Vec& logvar);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;  // of the expectation term; 0 when n_mc == 1
};

/// Variational free energy of the latent model, expectation by reparametrized
/// sampling z = mu + exp(logvar / 2) * eps.
MonteCarloEstimate muvb_energy_estimate(const EnergyHandles& handles, const MultiY& y, double sigma, Rng& rng,
                                        std::size_t n_mc = 1);
double muvb_energy(const EnergyHandles& handles, const MultiY& y, double sigma, Rng& rng, std::size_t n_mc = 1);

}  // namespace mdensity
