#include "mdensity/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mdensity/errors.hpp"

namespace mdensity {

NoiseModel::NoiseModel(std::vector<double> sigmas, int d) : sigmas_(std::move(sigmas)), d_(d) {
  if (sigmas_.empty()) throw std::invalid_argument("NoiseModel: need at least one channel");
  if (d_ < 1) throw std::invalid_argument("NoiseModel: dimension must be >= 1");
  for (double s : sigmas_) {
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("NoiseModel: sigmas must be positive and finite");
  }
}

NoiseModel NoiseModel::homogeneous(double sigma, int M, int d) {
  if (M < 1) throw std::invalid_argument("NoiseModel: M must be >= 1");
  return NoiseModel(std::vector<double>(static_cast<std::size_t>(M), sigma), d);
}

bool NoiseModel::is_homogeneous() const {
  for (double s : sigmas_)
    if (s != sigmas_.front()) return false;
  return true;
}

MultiY::MultiY(Vec data, int M, int d) : data_(std::move(data)), M_(M), d_(d) {
  if (M < 1 || d < 1) throw std::invalid_argument("MultiY: M and d must be >= 1");
  if (data_.size() != static_cast<Eigen::Index>(M) * d)
    throw DimensionError("MultiY: expected length " + std::to_string(M * d) + ", got " +
                         std::to_string(data_.size()));
}

Eigen::VectorBlock<const Vec> MultiY::channel(int m) const {
  if (m < 0 || m >= M_) throw std::out_of_range("MultiY: channel index " + std::to_string(m) + " out of range");
  return data_.segment(static_cast<Eigen::Index>(m) * d_, d_);
}

Eigen::VectorBlock<Vec> MultiY::channel(int m) {
  if (m < 0 || m >= M_) throw std::out_of_range("MultiY: channel index " + std::to_string(m) + " out of range");
  return data_.segment(static_cast<Eigen::Index>(m) * d_, d_);
}

Vec channel(const MultiY& y, int m) { return y.channel(m); }

void require_conforms(const MultiY& y, const NoiseModel& noise) {
  if (!y.conforms(noise))
    throw DimensionError("multimeasurement vector has shape (" + std::to_string(y.M()) + ", " +
                         std::to_string(y.d()) + "), noise model expects (" + std::to_string(noise.M()) +
                         ", " + std::to_string(noise.d()) + ")");
}

GaussianMixturePrior::GaussianMixturePrior(std::vector<double> weights, std::vector<Vec> means,
                                           std::vector<double> stds)
    : weights_(std::move(weights)), means_(std::move(means)), stds_(std::move(stds)) {
  if (weights_.empty()) throw std::invalid_argument("GaussianMixturePrior: no components");
  if (means_.size() != weights_.size() || stds_.size() != weights_.size())
    throw std::invalid_argument("GaussianMixturePrior: weights, means and stds differ in length");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("GaussianMixturePrior: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) >= 1e-12) throw std::invalid_argument("GaussianMixturePrior: weights must sum to 1");
  const auto d = means_.front().size();
  if (d < 1) throw std::invalid_argument("GaussianMixturePrior: empty mean");
  for (const auto& mu : means_)
    if (mu.size() != d) throw DimensionError("GaussianMixturePrior: means differ in dimension");
  for (double s : stds_)
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("GaussianMixturePrior: stds must be positive");
}

Vec GaussianMixturePrior::sample(Rng& rng) const {
  double u = rng.uniform();
  std::size_t k = 0;
  for (; k + 1 < weights_.size(); ++k) {
    if (u < weights_[k]) break;
    u -= weights_[k];
  }
  Vec x = means_[k];
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += stds_[k] * rng.normal();
  return x;
}

double GaussianMixturePrior::log_density(const Vec& x) const {
  if (x.size() != means_.front().size()) throw DimensionError("GaussianMixturePrior: dimension mismatch");
  const double d = static_cast<double>(x.size());
  std::vector<double> terms;
  terms.reserve(weights_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0.0) continue;
    const double s2 = stds_[k] * stds_[k];
    const double t = std::log(weights_[k]) - 0.5 * (x - means_[k]).squaredNorm() / s2 -
                     0.5 * d * std::log(2.0 * std::numbers::pi * s2);
    terms.push_back(t);
    top = std::max(top, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

double GaussianMixturePrior::cdf_1d(double x) const {
  if (d() != 1) throw DimensionError("cdf_1d: prior is not one-dimensional");
  double acc = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k)
    acc += weights_[k] * 0.5 * std::erfc(-(x - means_[k][0]) / (stds_[k] * std::numbers::sqrt2));
  return acc;
}

GaussianMixturePrior GaussianMixturePrior::symmetric_1d(double offset, double std) {
  return GaussianMixturePrior({0.5, 0.5}, {Vec::Constant(1, -offset), Vec::Constant(1, offset)}, {std, std});
}

MultiY sample_mnm(const Vec& x, const NoiseModel& noise, Rng& rng) {
  if (x.size() != noise.d())
    throw DimensionError("sample_mnm: len(x) = " + std::to_string(x.size()) + " but d = " + std::to_string(noise.d()));
  MultiY y = MultiY::zeros(noise);
  for (int m = 0; m < noise.M(); ++m) {
    auto block = y.channel(m);
    const double s = noise.sigma(m);
    for (Eigen::Index i = 0; i < x.size(); ++i) block[i] = x[i] + s * rng.normal();
  }
  return y;
}

double sigma_eff(const NoiseModel& noise) {
  double acc = 0.0;
  for (double s : noise.sigmas()) acc += s * s;
  return std::sqrt(acc) / noise.M();
}

Vec tile(const Vec& x, int M) { return x.replicate(M, 1); }

}  // namespace mdensity
