#pragma once

#include <vector>

#include <Eigen/Core>

#include "mdensity/losses.hpp"
#include "mdensity/noise.hpp"
#include "mdensity/rng.hpp"

namespace mdensity {

using Mat = Eigen::MatrixXd;

/// Weights and biases of a fully connected network, layer order.
struct MlpParameters {
  std::vector<Mat> weights;  // layer l: widths[l+1] x widths[l]
  std::vector<Vec> biases;   // layer l: widths[l+1]

  /// Same shapes, all zeros.
  MlpParameters zeros_like() const;
  std::size_t size() const;
  bool all_finite() const;
  /// this += alpha * other
  void axpy(double alpha, const MlpParameters& other);
  double max_abs() const;
};

enum class HiddenActivation { silu, identity };

/// nu_theta: R^{Md} -> R^{Md}. Inputs are scaled per channel by
/// 1/sqrt(0.225^2 + sigma_m^2); hidden layers use x * sigmoid(x) and the
/// output layer is linear.
class MlpScoreNet {
 public:
  static constexpr double kInputScaleOffset = 0.225;

  /// Zero-initialized network. widths = {M*d, hidden..., M*d}.
  MlpScoreNet(std::vector<int> widths, NoiseModel noise, HiddenActivation activation = HiddenActivation::silu);
  /// Glorot-uniform weights, zero biases.
  MlpScoreNet(std::vector<int> widths, NoiseModel noise, Rng& rng,
              HiddenActivation activation = HiddenActivation::silu);

  /// Default toy topology M*d - 64 - 64 - M*d.
  static std::vector<int> default_widths(const NoiseModel& noise);

  const std::vector<int>& widths() const { return widths_; }
  const NoiseModel& noise() const { return noise_; }
  HiddenActivation activation() const { return activation_; }
  const Vec& input_scale() const { return input_scale_; }
  const MlpParameters& params() const { return params_; }
  MlpParameters& params() { return params_; }
  long trained_steps() const { return trained_steps_; }
  void set_trained_steps(long steps) { trained_steps_ = steps; }

  Vec forward(const MultiY& y) const;
  /// Columns are samples.
  Mat forward_batch(const Mat& ys) const;

  /// Snapshot of the current parameters as a nu handle.
  NuFn as_nu() const;

 private:
  friend struct MlpBackprop;
  std::vector<int> widths_;
  NoiseModel noise_;
  HiddenActivation activation_;
  Vec input_scale_;
  MlpParameters params_;
  long trained_steps_ = 0;
};

struct MdaeGradient {
  double loss = 0.0;
  MlpParameters grads;
};

/// Loss (1/M)|x (x) M - nu(y)|^2 and its exact gradient.
MdaeGradient grad_mdae(const MlpScoreNet& net, const Vec& x, const MultiY& y);
/// Batch mean of the same loss; xs is d x B, ys is Md x B.
MdaeGradient grad_mdae_batch(const MlpScoreNet& net, const Mat& xs, const Mat& ys);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam moments for one parameter set.
struct AdamState {
  AdamConfig config;
  MlpParameters m;
  MlpParameters v;
  long step = 0;

  AdamState(const MlpParameters& shape, AdamConfig cfg = {});
};

void adam_step(AdamState& adam, MlpParameters& params, const MlpParameters& grads);

}  // namespace mdensity
