#include "mdensity/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace mdensity {

double ks_1d(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_1d: empty input");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    sup = std::max({sup, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return sup;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, converges fast for small lambda
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double x = std::exp(-pi2 / (8.0 * lambda * lambda));
    double acc = 0.0;
    for (int j = 1; j <= 9; j += 2) acc += std::pow(x, j * j);
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * acc;
  }
  double acc = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    acc += (j % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * acc, 0.0, 1.0);
}

KsTwoSample ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty input");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsTwoSample out;
  out.statistic = sup;
  const double ne = n * m / (n + m);
  const double root = std::sqrt(ne);
  out.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * sup);
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  double acc = 0.0;
  for (double v : xs) acc += v;
  return acc / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance: need at least two values");
  const double mu = mean(xs);
  double acc = 0.0;
  for (double v : xs) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(xs.size() - 1);
}

double chi_mean(double scale, int d) {
  if (d < 1) throw std::invalid_argument("chi_mean: d must be >= 1");
  return scale * std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

AutocorrEss autocorr_ess(std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("autocorr_ess: need at least two values");
  const std::size_t n = series.size();
  const double mu = mean(series);

  AutocorrEss out;
  double var0 = 0.0;
  for (double v : series) var0 += (v - mu) * (v - mu);
  if (!(var0 > 0.0)) {
    out.degenerate = true;
    out.ess = 1.0;
    out.autocorrelation = {1.0};
    return out;
  }

  std::size_t padded = 1;
  while (padded < 2 * n) padded <<= 1;
  std::vector<double> centered(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mu;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, centered);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> acov;
  fft.inv(acov, spectrum);

  auto rho = [&](std::size_t k) { return k < n ? acov[k] / acov[0] : 0.0; };

  // Geyer: sum pairs Gamma_t = rho_2t + rho_2t+1 while positive.
  double tau = -1.0;
  std::size_t t = 0;
  for (; 2 * t + 1 < n; ++t) {
    const double pair = rho(2 * t) + rho(2 * t + 1);
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const std::size_t cutoff = std::min(n - 1, 2 * t + 1);
  out.autocorrelation.resize(cutoff + 1);
  for (std::size_t k = 0; k <= cutoff; ++k) out.autocorrelation[k] = rho(k);
  out.integrated_time = std::max(tau, 1.0 / static_cast<double>(n));
  out.ess = static_cast<double>(n) / out.integrated_time;
  return out;
}

}  // namespace mdensity
