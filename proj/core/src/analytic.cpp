#include "mdensity/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "mdensity/errors.hpp"

namespace mdensity {

GaussianMDensity::GaussianMDensity(GaussianMixturePrior prior, NoiseModel noise)
    : prior_(std::move(prior)), noise_(std::move(noise)) {
  if (prior_.d() != noise_.d()) throw DimensionError("GaussianMDensity: prior and noise model differ in d");
  const int M = noise_.M();
  const double d = noise_.d();
  for (int k = 0; k < prior_.K(); ++k) {
    if (prior_.weights()[k] == 0.0) continue;
    Component c;
    c.sigma0 = prior_.stds()[k];
    c.mu = prior_.means()[k];
    c.log_weight = std::log(prior_.weights()[k]);

    // variances indexed 0..M with 0 the prior component
    std::vector<double> var(static_cast<std::size_t>(M) + 1);
    var[0] = c.sigma0 * c.sigma0;
    for (int m = 0; m < M; ++m) var[m + 1] = noise_.sigma(m) * noise_.sigma(m);

    double prod = 1.0;
    double inv_sum = 0.0;
    for (double v : var) {
      prod *= v;
      inv_sum += 1.0 / v;
    }
    c.prod_var = prod;
    c.z = prod * inv_sum;
    c.big_sigma = prod * c.z;
    c.log_partition = d * (0.5 * M * std::log(2.0 * std::numbers::pi) + 0.5 * std::log(c.z));

    auto leave_one_out = [&](std::size_t skip) {
      double p = 1.0;
      for (std::size_t l = 0; l < var.size(); ++l)
        if (l != skip) p *= var[l];
      return p;
    };
    c.mu_coef = leave_one_out(0);
    c.channel_coef.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) c.channel_coef[m] = leave_one_out(static_cast<std::size_t>(m) + 1);
    components_.push_back(std::move(c));
  }
}

Vec GaussianMDensity::tilde_y(int k, const MultiY& y) const {
  require_conforms(y, noise_);
  const Component& c = components_.at(static_cast<std::size_t>(k));
  Vec acc = c.mu_coef * c.mu;
  for (int m = 0; m < noise_.M(); ++m) acc += c.channel_coef[m] * y.channel(m);
  return acc;
}

double GaussianMDensity::component_log_density(int k, const MultiY& y) const {
  const Component& c = components_.at(static_cast<std::size_t>(k));
  const Vec yt = tilde_y(k, y);
  double quad = c.mu.squaredNorm() / (c.sigma0 * c.sigma0);
  for (int m = 0; m < noise_.M(); ++m) quad += y.channel(m).squaredNorm() / (noise_.sigma(m) * noise_.sigma(m));
  return -0.5 * quad + 0.5 * yt.squaredNorm() / c.big_sigma - c.log_partition;
}

namespace {

std::vector<double> weighted_log_terms(const GaussianMDensity& model, const MultiY& y) {
  std::vector<double> t(model.components().size());
  for (std::size_t k = 0; k < t.size(); ++k)
    t[k] = model.components()[k].log_weight + model.component_log_density(static_cast<int>(k), y);
  return t;
}

double log_sum_exp(const std::vector<double>& t) {
  const double top = *std::max_element(t.begin(), t.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : t) acc += std::exp(v - top);
  return top + std::log(acc);
}

}  // namespace

std::vector<double> GaussianMDensity::responsibilities(const MultiY& y) const {
  std::vector<double> t = weighted_log_terms(*this, y);
  const double lse = log_sum_exp(t);
  for (double& v : t) v = std::exp(v - lse);
  return t;
}

double GaussianMDensity::log_density(const MultiY& y) const { return log_sum_exp(weighted_log_terms(*this, y)); }

Vec GaussianMDensity::score(const MultiY& y) const {
  require_conforms(y, noise_);
  const std::vector<double> r = responsibilities(y);
  Vec out = Vec::Zero(noise_.dim());
  const int d = noise_.d();
  for (std::size_t k = 0; k < components_.size(); ++k) {
    if (r[k] == 0.0) continue;
    const Component& c = components_[k];
    const Vec yt = tilde_y(static_cast<int>(k), y);
    for (int m = 0; m < noise_.M(); ++m) {
      const double var = noise_.sigma(m) * noise_.sigma(m);
      out.segment(static_cast<Eigen::Index>(m) * d, d) +=
          r[k] * (-y.channel(m) / var + (c.channel_coef[m] / c.big_sigma) * yt);
    }
  }
  return out;
}

Vec GaussianMDensity::bayes_estimate(const MultiY& y) const {
  const std::vector<double> r = responsibilities(y);
  Vec out = Vec::Zero(noise_.d());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    if (r[k] == 0.0) continue;
    out += r[k] * tilde_y(static_cast<int>(k), y) / components_[k].z;
  }
  return out;
}

ScoreSource GaussianMDensity::score_source() const {
  // Copies keep the source valid independently of this object's lifetime.
  auto self = std::make_shared<const GaussianMDensity>(*this);
  return ScoreSource{[self](const MultiY& y) { return self->score(y); },
                     [self](const MultiY& y) { return self->log_density(y); }};
}

double log_mdensity_gaussian(const GaussianMDensity& model, const MultiY& y) { return model.log_density(y); }
Vec score_gaussian(const GaussianMDensity& model, const MultiY& y) { return model.score(y); }
Vec bayes_estimate_gaussian(const GaussianMDensity& model, const MultiY& y) { return model.bayes_estimate(y); }

double bayes_risk_1d(const GaussianMDensity& model, int nodes) {
  const GaussianMixturePrior& prior = model.prior();
  const NoiseModel& noise = model.noise();
  if (noise.d() != 1) throw DimensionError("bayes_risk_1d: prior must be one-dimensional");
  if (nodes < 3) throw std::invalid_argument("bayes_risk_1d: need at least 3 nodes");
  if (nodes % 2 == 0) ++nodes;
  double precision = 0.0;
  for (double s : noise.sigmas()) precision += 1.0 / (s * s);
  const double tau2 = 1.0 / precision;

  double second_moment = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<double> spread(static_cast<std::size_t>(prior.K()));
  for (int k = 0; k < prior.K(); ++k) {
    const double mu = prior.means()[k][0], s0 = prior.stds()[k];
    second_moment += prior.weights()[k] * (mu * mu + s0 * s0);
    spread[k] = std::sqrt(s0 * s0 + tau2);
    lo = std::min(lo, mu - 12.0 * spread[k]);
    hi = std::max(hi, mu + 12.0 * spread[k]);
  }
  const double h = (hi - lo) / (nodes - 1);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double s = lo + i * h;
    double p = 0.0;
    for (int k = 0; k < prior.K(); ++k) {
      const double z = (s - prior.means()[k][0]) / spread[k];
      p += prior.weights()[k] * std::exp(-0.5 * z * z) / (spread[k] * std::sqrt(2.0 * std::numbers::pi));
    }
    const double xhat = model.bayes_estimate(MultiY(Vec::Constant(noise.M(), s), noise))[0];
    const double w = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * p * xhat * xhat;
  }
  return second_moment - acc * h / 3.0;
}

PoissonExpMDensity::PoissonExpMDensity(int M) : M_(M) {
  if (M < 1) throw std::invalid_argument("PoissonExpMDensity: M must be >= 1");
}

namespace {

void check_counts(const PoissonExpMDensity& model, std::span<const double> y) {
  if (static_cast<int>(y.size()) != model.M())
    throw DimensionError("Poisson M-density: expected " + std::to_string(model.M()) + " counts");
  for (double v : y) {
    if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
      throw std::invalid_argument("Poisson M-density: counts must be non-negative integers");
  }
}

}  // namespace

double poisson_log_mdensity(const PoissonExpMDensity& model, std::span<const double> y) {
  check_counts(model, y);
  double total = 0.0;
  double log_denominator = 0.0;
  for (double v : y) {
    total += v;
    log_denominator += std::lgamma(v + 1.0);
  }
  return std::lgamma(total + 1.0) - log_denominator - (1.0 + total) * std::log(model.M() + 1.0);
}

double poisson_estimate(const PoissonExpMDensity& model, std::span<const double> y) {
  check_counts(model, y);
  double total = 0.0;
  for (double v : y) total += v;
  return (total + 1.0) / (model.M() + 1.0);
}

double poisson_robbins_estimate(const PoissonExpMDensity& model, std::span<const double> y, int m) {
  check_counts(model, y);
  if (m < 0 || m >= model.M()) throw std::out_of_range("poisson_robbins_estimate: channel out of range");
  std::vector<double> bumped(y.begin(), y.end());
  bumped[static_cast<std::size_t>(m)] += 1.0;
  return (y[static_cast<std::size_t>(m)] + 1.0) *
         std::exp(poisson_log_mdensity(model, bumped) - poisson_log_mdensity(model, y));
}

}  // namespace mdensity
