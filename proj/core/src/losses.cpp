#include "mdensity/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "mdensity/errors.hpp"
#include "mdensity/estimators.hpp"

namespace mdensity {

ChannelEstimator estimator_from_score(ScoreSource src, NoiseModel noise) {
  return [src = std::move(src), noise = std::move(noise)](const MultiY& y, int m) {
    return bayes_estimate_channel(src, noise, y, m);
  };
}

double neb_loss_channel(const ChannelEstimator& est, const Vec& x, const MultiY& y, int m) {
  const Vec e = est(y, m);
  if (e.size() != x.size()) throw DimensionError("neb_loss_channel: estimate and x differ in length");
  return (x - e).squaredNorm();
}

double neb_loss(const ChannelEstimator& est, const Vec& x, const MultiY& y) {
  double acc = 0.0;
  for (int m = 0; m < y.M(); ++m) acc += neb_loss_channel(est, x, y, m);
  return acc / y.M();
}

double mdsm_loss(const ScoreFn& score, const Vec& x, const MultiY& y, const NoiseModel& noise) {
  require_conforms(y, noise);
  if (x.size() != noise.d()) throw DimensionError("mdsm_loss: len(x) != d");
  const Vec s = score(y);
  if (s.size() != noise.dim()) throw DimensionError("mdsm_loss: score has the wrong length");
  double acc = 0.0;
  for (int m = 0; m < noise.M(); ++m) {
    const double var = noise.sigma(m) * noise.sigma(m);
    acc += (s.segment(static_cast<Eigen::Index>(m) * noise.d(), noise.d()) + (y.channel(m) - x) / var)
               .squaredNorm();
  }
  return acc;
}

double mdae_loss(const Vec& nu_value, const Vec& x, int M) {
  if (nu_value.size() != x.size() * M) throw DimensionError("mdae_loss: nu output has the wrong length");
  double acc = 0.0;
  const Eigen::Index d = x.size();
  for (int m = 0; m < M; ++m) acc += (x - nu_value.segment(m * d, d)).squaredNorm();
  return acc / M;
}

double mdae_loss(const NuFn& nu, const Vec& x, const MultiY& y) {
  if (x.size() != y.d()) throw DimensionError("mdae_loss: len(x) != d");
  return mdae_loss(nu(y), x, y.M());
}

ScoreSource score_from_nu(NuFn nu, NoiseModel noise) {
  ScoreSource src;
  src.score = [nu = std::move(nu), noise = std::move(noise)](const MultiY& y) {
    require_conforms(y, noise);
    Vec s = nu(y) - y.data();
    if (s.size() != noise.dim()) throw DimensionError("score_from_nu: nu output has the wrong length");
    for (int m = 0; m < noise.M(); ++m)
      s.segment(static_cast<Eigen::Index>(m) * noise.d(), noise.d()) /= noise.sigma(m) * noise.sigma(m);
    return s;
  };
  return src;
}

double mem2_energy(const EnergyHandles& handles, const MultiY& y, double sigma) {
  if (!handles.nu) throw std::invalid_argument("mem2_energy: nu handle is required");
  const Vec nu = handles.nu(y);
  if (nu.size() != y.data().size()) throw DimensionError("mem2_energy: nu output has the wrong length");
  double energy = (y.data() - nu).squaredNorm() / (2.0 * sigma * sigma);
  if (handles.h) energy += handles.h(y, nu);
  return energy;
}

double kl_diag_gaussian(const Vec& mu, const Vec& logvar) {
  if (mu.size() != logvar.size()) throw DimensionError("kl_diag_gaussian: mu and logvar differ in length");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    acc += mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i];
  return 0.5 * acc;
}

MonteCarloEstimate muvb_energy_estimate(const EnergyHandles& handles, const MultiY& y, double sigma, Rng& rng,
                                        std::size_t n_mc) {
  if (!handles.encoder || !handles.decoder)
    throw std::invalid_argument("muvb_energy: encoder and decoder handles are required");
  if (n_mc == 0) throw std::invalid_argument("muvb_energy: n_mc must be >= 1");
  const LatentGaussian q = handles.encoder(y);
  if (q.mu.size() != q.logvar.size()) throw DimensionError("muvb_energy: encoder output shapes differ");
  const Vec scale = (0.5 * q.logvar.array()).exp().matrix();

  // Welford accumulation of the reconstruction term
  double mean = 0.0;
  double m2 = 0.0;
  Vec eps(q.mu.size());
  for (std::size_t i = 0; i < n_mc; ++i) {
    rng.fill_normal(eps);
    const Vec z = q.mu + scale.cwiseProduct(eps);
    const Vec nu = handles.decoder(z);
    if (nu.size() != y.data().size()) throw DimensionError("muvb_energy: decoder output has the wrong length");
    double term = (y.data() - nu).squaredNorm() / (2.0 * sigma * sigma);
    if (handles.h) term += handles.h(y, nu);
    const double delta = term - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (term - mean);
  }
  MonteCarloEstimate out;
  out.value = mean + kl_diag_gaussian(q.mu, q.logvar);
  if (n_mc > 1) out.std_error = std::sqrt(m2 / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc));
  return out;
}

double muvb_energy(const EnergyHandles& handles, const MultiY& y, double sigma, Rng& rng, std::size_t n_mc) {
  return muvb_energy_estimate(handles, y, sigma, rng, n_mc).value;
}

}  // namespace mdensity
