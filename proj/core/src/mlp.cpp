#include "mdensity/mlp.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "mdensity/errors.hpp"

namespace mdensity {

MlpParameters MlpParameters::zeros_like() const {
  MlpParameters out;
  for (const auto& w : weights) out.weights.push_back(Mat::Zero(w.rows(), w.cols()));
  for (const auto& b : biases) out.biases.push_back(Vec::Zero(b.size()));
  return out;
}

std::size_t MlpParameters::size() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

bool MlpParameters::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

void MlpParameters::axpy(double alpha, const MlpParameters& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += alpha * other.weights[l];
    biases[l] += alpha * other.biases[l];
  }
}

double MlpParameters::max_abs() const {
  double out = 0.0;
  for (const auto& w : weights) out = std::max(out, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) out = std::max(out, b.cwiseAbs().maxCoeff());
  return out;
}

namespace {

void validate_widths(const std::vector<int>& widths, const NoiseModel& noise) {
  if (widths.size() < 3) throw std::invalid_argument("MlpScoreNet: need at least one hidden layer");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("MlpScoreNet: layer widths must be >= 1");
  if (widths.front() != noise.dim() || widths.back() != noise.dim())
    throw DimensionError("MlpScoreNet: input and output widths must equal M*d");
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

MlpScoreNet::MlpScoreNet(std::vector<int> widths, NoiseModel noise, HiddenActivation activation)
    : widths_(std::move(widths)), noise_(std::move(noise)), activation_(activation) {
  validate_widths(widths_, noise_);
  input_scale_.resize(noise_.dim());
  for (int m = 0; m < noise_.M(); ++m) {
    const double s = noise_.sigma(m);
    input_scale_.segment(static_cast<Eigen::Index>(m) * noise_.d(), noise_.d())
        .setConstant(1.0 / std::sqrt(kInputScaleOffset * kInputScaleOffset + s * s));
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    params_.weights.push_back(Mat::Zero(widths_[l + 1], widths_[l]));
    params_.biases.push_back(Vec::Zero(widths_[l + 1]));
  }
}

MlpScoreNet::MlpScoreNet(std::vector<int> widths, NoiseModel noise, Rng& rng, HiddenActivation activation)
    : MlpScoreNet(std::move(widths), std::move(noise), activation) {
  for (auto& w : params_.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = limit * (2.0 * rng.uniform() - 1.0);
  }
}

std::vector<int> MlpScoreNet::default_widths(const NoiseModel& noise) {
  const int n = static_cast<int>(noise.dim());
  return {n, 64, 64, n};
}

// Forward pass that keeps pre-activations for the backward pass.
struct MlpBackprop {
  static void forward(const MlpScoreNet& net, const Mat& ys, std::vector<Mat>& inputs, std::vector<Mat>& pre) {
    const auto& p = net.params_;
    const std::size_t L = p.weights.size();
    inputs.resize(L);
    pre.resize(L);
    inputs[0] = net.input_scale_.asDiagonal() * ys;
    for (std::size_t l = 0; l < L; ++l) {
      pre[l] = p.weights[l] * inputs[l];
      pre[l].colwise() += p.biases[l];
      if (l + 1 < L) {
        if (net.activation_ == HiddenActivation::silu)
          inputs[l + 1] = pre[l].unaryExpr([](double z) { return z * sigmoid(z); });
        else
          inputs[l + 1] = pre[l];
      }
    }
  }

  static MdaeGradient gradient(const MlpScoreNet& net, const Mat& xs, const Mat& ys) {
    const int M = net.noise_.M();
    const Eigen::Index d = net.noise_.d();
    if (xs.rows() != d || ys.rows() != net.noise_.dim() || xs.cols() != ys.cols() || xs.cols() < 1)
      throw DimensionError("grad_mdae: batch shapes do not conform");
    const double batch = static_cast<double>(xs.cols());

    std::vector<Mat> inputs;
    std::vector<Mat> pre;
    forward(net, ys, inputs, pre);
    const std::size_t L = net.params_.weights.size();

    Mat residual = pre[L - 1];  // nu - x (x) M
    for (int m = 0; m < M; ++m) residual.middleRows(m * d, d) -= xs;

    MdaeGradient out;
    out.loss = residual.squaredNorm() / (M * batch);
    if (!std::isfinite(out.loss)) throw NonFiniteError("grad_mdae: loss is not finite");
    out.grads = net.params_.zeros_like();

    Mat delta = (2.0 / (M * batch)) * residual;
    for (std::size_t l = L; l-- > 0;) {
      out.grads.weights[l].noalias() = delta * inputs[l].transpose();
      out.grads.biases[l] = delta.rowwise().sum();
      if (l == 0) break;
      Mat back = net.params_.weights[l].transpose() * delta;
      if (net.activation_ == HiddenActivation::silu) {
        back.array() *= pre[l - 1].unaryExpr([](double z) {
          const double s = sigmoid(z);
          return s * (1.0 + z * (1.0 - s));
        }).array();
      }
      delta = std::move(back);
    }
    return out;
  }
};

Mat MlpScoreNet::forward_batch(const Mat& ys) const {
  if (ys.rows() != noise_.dim()) throw DimensionError("MlpScoreNet: input has the wrong length");
  if (!params_.all_finite()) throw NonFiniteError("MlpScoreNet: parameters are not finite");
  std::vector<Mat> inputs;
  std::vector<Mat> pre;
  MlpBackprop::forward(*this, ys, inputs, pre);
  return pre.back();
}

Vec MlpScoreNet::forward(const MultiY& y) const {
  require_conforms(y, noise_);
  return forward_batch(y.data());
}

NuFn MlpScoreNet::as_nu() const {
  auto snapshot = std::make_shared<const MlpScoreNet>(*this);
  return [snapshot](const MultiY& y) { return snapshot->forward(y); };
}

MdaeGradient grad_mdae_batch(const MlpScoreNet& net, const Mat& xs, const Mat& ys) {
  return MlpBackprop::gradient(net, xs, ys);
}

MdaeGradient grad_mdae(const MlpScoreNet& net, const Vec& x, const MultiY& y) {
  require_conforms(y, net.noise());
  return MlpBackprop::gradient(net, x, y.data());
}

AdamState::AdamState(const MlpParameters& shape, AdamConfig cfg)
    : config(cfg), m(shape.zeros_like()), v(shape.zeros_like()) {}

void adam_step(AdamState& adam, MlpParameters& params, const MlpParameters& grads) {
  if (params.weights.size() != grads.weights.size() || params.weights.size() != adam.m.weights.size())
    throw DimensionError("adam_step: parameter, gradient and moment shapes differ");
  ++adam.step;
  const auto& c = adam.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(adam.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(adam.step));
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    if (p.size() != g.size()) throw DimensionError("adam_step: gradient shape mismatch");
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.eps);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], adam.m.weights[l], adam.v.weights[l], grads.weights[l]);
    update(params.biases[l], adam.m.biases[l], adam.v.biases[l], grads.biases[l]);
  }
}

}  // namespace mdensity
