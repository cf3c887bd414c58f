#include "mdensity/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mdensity/errors.hpp"

namespace mdensity {

ToyDataset ToyDataset::gaussian_mixture(GaussianMixturePrior prior) {
  ToyDataset ds;
  if (prior.d() == 1)
    ds.kind_ = Kind::gaussian_mixture_1d;
  else if (prior.d() == 2)
    ds.kind_ = Kind::gaussian_mixture_2d;
  else
    throw std::invalid_argument("ToyDataset: mixture datasets are 1D or 2D");
  ds.prior_ = std::move(prior);
  return ds;
}

ToyDataset ToyDataset::two_rings(double r_inner, double r_outer, double width) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner) || !(width > 0.0))
    throw std::invalid_argument("ToyDataset: need 0 < r_inner < r_outer and width > 0");
  ToyDataset ds;
  ds.kind_ = Kind::two_rings_2d;
  ds.rings_ = {r_inner, r_outer, width};
  return ds;
}

int ToyDataset::d() const { return prior_ ? prior_->d() : 2; }

Vec ToyDataset::sample(Rng& rng) const {
  if (prior_) return prior_->sample(rng);
  const double radius = (rng.uniform() < 0.5 ? rings_[0] : rings_[1]) + rings_[2] * rng.normal();
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  Vec x(2);
  x << radius * std::cos(angle), radius * std::sin(angle);
  return x;
}

std::string_view to_string(ToyDataset::Kind kind) {
  switch (kind) {
    case ToyDataset::Kind::gaussian_mixture_1d: return "gaussian_mixture_1d";
    case ToyDataset::Kind::gaussian_mixture_2d: return "gaussian_mixture_2d";
    case ToyDataset::Kind::two_rings_2d: return "two_rings_2d";
  }
  return "?";
}

namespace {

void draw_batch(const ToyDataset& dataset, const NoiseModel& noise, Rng& rng, Mat& xs, Mat& ys) {
  for (Eigen::Index b = 0; b < xs.cols(); ++b) {
    const Vec x = dataset.sample(rng);
    xs.col(b) = x;
    ys.col(b) = sample_mnm(x, noise, rng).data();
  }
}

}  // namespace

TrainResult train_mdae(const ToyDataset& dataset, const NoiseModel& noise, MlpScoreNet net,
                       const TrainOptions& options, Rng& rng, std::optional<AdamState> resume) {
  if (options.steps < 1) throw std::invalid_argument("train_mdae: steps must be >= 1");
  if (options.batch < 1) throw std::invalid_argument("train_mdae: batch must be >= 1");
  if (!(options.lr > 0.0)) throw std::invalid_argument("train_mdae: lr must be positive");
  if (dataset.d() != noise.d()) throw DimensionError("train_mdae: dataset and noise model differ in d");
  if (!(net.noise() == noise)) throw std::invalid_argument("train_mdae: net was built for a different noise model");

  AdamState adam = resume ? std::move(*resume) : AdamState(net.params(), AdamConfig{options.lr});
  adam.config.lr = options.lr;

  TrainResult result{std::move(net), std::move(adam), {}};
  result.losses.reserve(static_cast<std::size_t>(options.steps));
  Mat xs(noise.d(), options.batch);
  Mat ys(noise.dim(), options.batch);
  for (long step = 0; step < options.steps; ++step) {
    draw_batch(dataset, noise, rng, xs, ys);
    MdaeGradient g;
    try {
      g = grad_mdae_batch(result.net, xs, ys);
    } catch (const NonFiniteError&) {
      throw DivergenceError(result.net.trained_steps() + 1, "train_mdae: loss is not finite");
    }
    adam_step(result.adam, result.net.params(), g.grads);
    result.net.set_trained_steps(result.net.trained_steps() + 1);
    if (!result.net.params().all_finite())
      throw DivergenceError(result.net.trained_steps(), "train_mdae: parameters are not finite");
    result.losses.push_back(g.loss);
  }
  return result;
}

double evaluate_mdae(const MlpScoreNet& net, const ToyDataset& dataset, long samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("evaluate_mdae: samples must be >= 1");
  const NoiseModel& noise = net.noise();
  constexpr long kChunk = 4096;
  double total = 0.0;
  for (long done = 0; done < samples; done += kChunk) {
    const long n = std::min(kChunk, samples - done);
    Mat xs(noise.d(), n);
    Mat ys(noise.dim(), n);
    draw_batch(dataset, noise, rng, xs, ys);
    Mat out = net.forward_batch(ys);
    for (int m = 0; m < noise.M(); ++m) out.middleRows(static_cast<Eigen::Index>(m) * noise.d(), noise.d()) -= xs;
    total += out.squaredNorm() / noise.M();
  }
  return total / static_cast<double>(samples);
}

}  // namespace mdensity
