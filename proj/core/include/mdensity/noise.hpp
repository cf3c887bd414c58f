#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mdensity/rng.hpp"

namespace mdensity {

using Vec = Eigen::VectorXd;

/// Factorial Gaussian kernel: M channels y_m = x + sigma_m * eps_m in R^d.
class NoiseModel {
 public:
  NoiseModel(std::vector<double> sigmas, int d);

  /// sigma (x) M shorthand.
  static NoiseModel homogeneous(double sigma, int M, int d);

  int M() const { return static_cast<int>(sigmas_.size()); }
  int d() const { return d_; }
  /// Length of a multimeasurement vector, M * d.
  Eigen::Index dim() const { return static_cast<Eigen::Index>(M()) * d_; }
  double sigma(int m) const { return sigmas_.at(static_cast<std::size_t>(m)); }
  const std::vector<double>& sigmas() const { return sigmas_; }

  /// True iff every sigma is bitwise equal to the first.
  bool is_homogeneous() const;

  bool operator==(const NoiseModel&) const = default;

 private:
  std::vector<double> sigmas_;
  int d_;
};

/// Point in R^{Md}, channel-major: channel m occupies [m*d, (m+1)*d).
class MultiY {
 public:
  MultiY(Vec data, int M, int d);
  MultiY(Vec data, const NoiseModel& noise) : MultiY(std::move(data), noise.M(), noise.d()) {}
  static MultiY zeros(const NoiseModel& noise) { return {Vec::Zero(noise.dim()), noise}; }

  int M() const { return M_; }
  int d() const { return d_; }
  const Vec& data() const { return data_; }
  Vec& data() { return data_; }

  /// Channel m as a view; throws std::out_of_range when m is not in [0, M).
  Eigen::VectorBlock<const Vec> channel(int m) const;
  Eigen::VectorBlock<Vec> channel(int m);

  bool conforms(const NoiseModel& noise) const { return M_ == noise.M() && d_ == noise.d(); }

 private:
  Vec data_;
  int M_;
  int d_;
};

/// Channel m of y, copied out.
Vec channel(const MultiY& y, int m);

/// Throws DimensionError unless y has the shape of `noise`.
void require_conforms(const MultiY& y, const NoiseModel& noise);

using ScoreFn = std::function<Vec(const MultiY&)>;
using LogDensityFn = std::function<double(const MultiY&)>;

/// Anything that provides grad log p(y); optionally also log p(y) up to a constant.
/// When log_density is present, score is expected to be its gradient.
struct ScoreSource {
  ScoreFn score;
  std::optional<LogDensityFn> log_density;

  bool has_log_density() const { return log_density.has_value() && static_cast<bool>(*log_density); }
};

/// Isotropic Gaussian mixture prior on R^d.
class GaussianMixturePrior {
 public:
  GaussianMixturePrior(std::vector<double> weights, std::vector<Vec> means, std::vector<double> stds);

  int K() const { return static_cast<int>(weights_.size()); }
  int d() const { return static_cast<int>(means_.front().size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }

  Vec sample(Rng& rng) const;
  double log_density(const Vec& x) const;

  /// CDF of a 1D prior (d == 1 only).
  double cdf_1d(double x) const;

  /// Symmetric two-mode prior in 1D: weights 1/2, means -/+ offset, common std.
  static GaussianMixturePrior symmetric_1d(double offset, double std);

 private:
  std::vector<double> weights_;
  std::vector<Vec> means_;
  std::vector<double> stds_;
};

/// One draw y ~ p(y | x).
MultiY sample_mnm(const Vec& x, const NoiseModel& noise, Rng& rng);

/// (1/M) * sqrt(sum_m sigma_m^2).
double sigma_eff(const NoiseModel& noise);

/// x repeated M times in channel-major layout.
Vec tile(const Vec& x, int M);

}  // namespace mdensity
