#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mdensity/mlp.hpp"

namespace mdensity {

/// Desk-scale clean-data generators.
class ToyDataset {
 public:
  enum class Kind { gaussian_mixture_1d, gaussian_mixture_2d, two_rings_2d };

  static ToyDataset gaussian_mixture(GaussianMixturePrior prior);
  /// Two concentric rings in R^2 with radii r_inner < r_outer, equal weight,
  /// radial Gaussian jitter of std `width`.
  static ToyDataset two_rings(double r_inner, double r_outer, double width);

  Kind kind() const { return kind_; }
  int d() const;
  Vec sample(Rng& rng) const;
  /// The mixture prior for the mixture kinds.
  const std::optional<GaussianMixturePrior>& prior() const { return prior_; }
  const std::vector<double>& ring_params() const { return rings_; }

 private:
  Kind kind_ = Kind::gaussian_mixture_1d;
  std::optional<GaussianMixturePrior> prior_;
  std::vector<double> rings_;  // r_inner, r_outer, width
};

std::string_view to_string(ToyDataset::Kind kind);

struct TrainOptions {
  long steps = 1000;
  int batch = 128;
  double lr = 1e-3;
};

struct TrainResult {
  MlpScoreNet net;
  AdamState adam;
  std::vector<double> losses;  // one per step
};

/// Adam on the multidenoising loss with a fresh batch x ~ dataset,
/// y ~ p(y|x) per step. Passing `resume` continues an earlier run's
/// optimizer state. Non-finite loss throws DivergenceError with the step.
TrainResult train_mdae(const ToyDataset& dataset, const NoiseModel& noise, MlpScoreNet net,
                       const TrainOptions& options, Rng& rng, std::optional<AdamState> resume = std::nullopt);

/// Batch mean multidenoising loss of `net` on fresh draws (no gradient).
double evaluate_mdae(const MlpScoreNet& net, const ToyDataset& dataset, long samples, Rng& rng);

}  // namespace mdensity
