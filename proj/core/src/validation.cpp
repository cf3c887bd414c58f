#include "mdensity/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdensity/analytic.hpp"
#include "mdensity/estimators.hpp"
#include "mdensity/losses.hpp"
#include "mdensity/mlp.hpp"
#include "mdensity/samplers.hpp"

namespace mdensity {

const std::vector<std::string>& validation_suite_manifest() {
  static const std::vector<std::string> names = {
      "closed_form_agreement",     "sigma_limit_recovery",        "cross_channel_consistency",
      "fd_score_single",           "fd_score_mixture",            "fd_mlp_gradient",
      "poisson_robbins_identity",  "poisson_normalization",       "mdsm_neb_identity",
      "cholesky_reconstruction",   "covariance_taylor_limits",    "covariance_series_continuity",
      "perm_symmetry",             "concentration",               "congruence",
      "sampler_moments_sachs",     "sampler_moments_cheng",       "kl_nonnegativity",
  };
  return names;
}

namespace {

ScoreSource maybe_corrupt(ScoreSource src, const NoiseModel& noise, bool corrupt) {
  if (!corrupt) return src;
  auto inner = src.score;
  const int d = noise.d();
  src.score = [inner, d](const MultiY& y) {
    Vec s = inner(y);
    s.head(d) = -s.head(d);
    return s;
  };
  return src;
}

std::vector<MultiY> draw_points(const GaussianMixturePrior& prior, const NoiseModel& noise, int n, Rng& rng) {
  std::vector<MultiY> pts;
  for (int i = 0; i < n; ++i) pts.push_back(sample_mnm(prior.sample(rng), noise, rng));
  return pts;
}

DiagnosticReport named(DiagnosticReport r, std::string name) {
  r.name = std::move(name);
  return r;
}

DiagnosticReport closed_form_agreement(const ValidationOptions& opt, Rng& rng) {
  const NoiseModel noise({0.5, 1.0, 2.0}, 3);
  Vec mu(3);
  mu << 0.3, -1.0, 2.0;
  const GaussianMDensity model(GaussianMixturePrior({1.0}, {mu}, {0.8}), noise);
  const ScoreSource src = maybe_corrupt(model.score_source(), noise, opt.corrupt_score);
  double worst = 0.0;
  for (const MultiY& y : draw_points(model.prior(), noise, 200, rng)) {
    const Vec closed = model.tilde_y(0, y) / model.components()[0].z;
    for (int m = 0; m < noise.M(); ++m)
      worst = std::max(worst, (bayes_estimate_channel(src, noise, y, m) - closed).cwiseAbs().maxCoeff());
  }
  return {"closed_form_agreement", {Check::at_most("max_abs_gap", worst, 1e-10)}, "single Gaussian, M=3, d=3"};
}

DiagnosticReport sigma_limit_recovery(Rng& rng) {
  const NoiseModel noise({1e-8, 1.0}, 2);
  const GaussianMDensity model(GaussianMixturePrior({1.0}, {Vec::Constant(2, 0.5)}, {1.0}), noise);
  double worst = 0.0;
  for (const MultiY& y : draw_points(model.prior(), noise, 50, rng))
    worst = std::max(worst, (model.bayes_estimate(y) - y.channel(0)).norm());
  return {"sigma_limit_recovery", {Check::at_most("max_norm_gap", worst, 1e-6)}, "sigma_1 = 1e-8"};
}

DiagnosticReport cross_channel_consistency(const ValidationOptions& opt, Rng& rng) {
  const NoiseModel noise({0.6, 1.0, 1.5}, 1);
  const GaussianMDensity model(
      GaussianMixturePrior({0.3, 0.7}, {Vec::Constant(1, -2.0), Vec::Constant(1, 1.5)}, {0.2, 0.5}), noise);
  const ScoreSource src = maybe_corrupt(model.score_source(), noise, opt.corrupt_score);
  double worst = 0.0;
  for (const MultiY& y : draw_points(model.prior(), noise, 200, rng))
    worst = std::max(worst, bayes_estimate_mean(src, noise, y).consistency_gap);
  return {"cross_channel_consistency", {Check::at_most("max_consistency_gap", worst, 1e-10)},
          "1D mixture, heterogeneous sigmas"};
}

DiagnosticReport fd_score(const ValidationOptions& opt, Rng& rng, bool mixture) {
  const NoiseModel noise = mixture ? NoiseModel::homogeneous(1.0, 2, 1) : NoiseModel({0.5, 1.0, 2.0}, 2);
  const GaussianMixturePrior prior =
      mixture ? GaussianMixturePrior::symmetric_1d(2.0, 0.1)
              : GaussianMixturePrior({1.0}, {Vec::Constant(2, 0.5)}, {1.0});
  const GaussianMDensity model(prior, noise);
  const ScoreSource src = maybe_corrupt(model.score_source(), noise, opt.corrupt_score);
  return named(fd_score_check(src, draw_points(prior, noise, 50, rng), 1e-5, 1e-5),
               mixture ? "fd_score_mixture" : "fd_score_single");
}

DiagnosticReport fd_mlp_gradient(Rng& rng) {
  const NoiseModel noise = NoiseModel::homogeneous(0.5, 2, 1);
  MlpScoreNet net({2, 16, 16, 2}, noise, rng);
  for (auto& b : net.params().biases) b = 0.1 * rng.normal_vector(b.size());
  const double h = 1e-5;
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    const Vec x = rng.normal_vector(1);
    const MultiY y = sample_mnm(x, noise, rng);
    const MdaeGradient g = grad_mdae(net, x, y);
    MlpScoreNet probe = net;
    auto loss_at = [&] { return mdae_loss(probe.forward(y), x, noise.M()); };
    auto compare = [&](double& param, double analytic) {
      const double orig = param;
      param = orig + h;
      const double up = loss_at();
      param = orig - h;
      const double down = loss_at();
      param = orig;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
    };
    for (std::size_t l = 0; l < net.params().weights.size(); ++l) {
      auto& w = probe.params().weights[l];
      for (Eigen::Index i = 0; i < w.size(); ++i) compare(w.data()[i], g.grads.weights[l].data()[i]);
      auto& b = probe.params().biases[l];
      for (Eigen::Index i = 0; i < b.size(); ++i) compare(b[i], g.grads.biases[l][i]);
    }
  }
  return {"fd_mlp_gradient", {Check::at_most("max_rel_error", worst, 1e-4)}, "2-16-16-2 net, 20 points, h=1e-5"};
}

DiagnosticReport poisson_robbins(Rng& rng) {
  double worst = 0.0;
  for (int M : {1, 2, 4}) {
    const PoissonExpMDensity model(M);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> y(static_cast<std::size_t>(M));
      for (double& v : y) v = std::floor(rng.uniform() * 30.0);
      const double closed = poisson_estimate(model, y);
      for (int m = 0; m < M; ++m)
        worst = std::max(worst, std::abs(poisson_robbins_estimate(model, y, m) - closed) / closed);
    }
  }
  return {"poisson_robbins_identity", {Check::at_most("max_rel_gap", worst, 1e-12)}, "M in {1,2,4}, 100 draws each"};
}

DiagnosticReport poisson_normalization() {
  const PoissonExpMDensity model(2);
  double total = 0.0;
  for (int s = 0; s <= 60; ++s)
    for (int a = 0; a <= s; ++a) {
      const double y[2] = {static_cast<double>(a), static_cast<double>(s - a)};
      total += std::exp(poisson_log_mdensity(model, y));
    }
  return {"poisson_normalization", {Check::at_most("abs_mass_gap", std::abs(total - 1.0), 1e-9)},
          "M=2, sum over y1+y2 <= 60"};
}

DiagnosticReport mdsm_neb(const ValidationOptions& opt, Rng& rng) {
  const double sigma = 0.7;
  const NoiseModel noise = NoiseModel::homogeneous(sigma, 3, 2);
  const GaussianMDensity model(GaussianMixturePrior({0.5, 0.5}, {Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)},
                                                    {0.3, 0.3}),
                               noise);
  // a deliberately imperfect score keeps the identity non-trivial
  ScoreSource src = maybe_corrupt(model.score_source(), noise, opt.corrupt_score);
  auto base = src.score;
  src.score = [base](const MultiY& y) -> Vec { return base(y) + 0.1 * y.data().array().sin().matrix(); };
  const ChannelEstimator est = estimator_from_score(src, noise);
  const double factor = noise.M() / std::pow(sigma, 4);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vec x = model.prior().sample(rng);
    const MultiY y = sample_mnm(x, noise, rng);
    const double mdsm = mdsm_loss(src.score, x, y, noise);
    const double neb = neb_loss(est, x, y);
    worst = std::max(worst, std::abs(mdsm - factor * neb) / std::max(mdsm, 1e-300));
  }
  return {"mdsm_neb_identity", {Check::at_most("max_rel_gap", worst, 1e-10)}, "sigma (x) 3, d=2"};
}

DiagnosticReport cholesky_reconstruction(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double delta = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
    const double gamma = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    const double u = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    const LangevinCovariance cov = langevin_covariance(delta, gamma, u);
    const CovCholesky L = cheng_cov_chol(delta, gamma, u);
    worst = std::max({worst, std::abs(L.yy * L.yy - cov.yy) / cov.yy, std::abs(L.yy * L.vy - cov.yv) / cov.yv,
                      std::abs(L.vy * L.vy + L.vv * L.vv - cov.vv) / cov.vv});
  }
  return {"cholesky_reconstruction", {Check::at_most("max_rel_error", worst, 1e-12)}, "100 random (delta, gamma, u)"};
}

DiagnosticReport covariance_taylor() {
  const double delta = 1e-3;
  const LangevinCovariance cov = langevin_covariance(delta, 1.0, 1.0);
  return {"covariance_taylor_limits",
          {Check::at_most("yy_rel_gap", std::abs(cov.yy / (2.0 / 3.0 * std::pow(delta, 3)) - 1.0), 0.01),
           Check::at_most("vv_rel_gap", std::abs(cov.vv / (2.0 * delta) - 1.0), 0.01),
           Check::at_most("yv_rel_gap", std::abs(cov.yv / (delta * delta) - 1.0), 0.01)},
          "delta=1e-3, gamma=u=1"};
}

DiagnosticReport covariance_continuity() {
  const double gamma = 1.3;
  const double at = kCovarianceSeriesCrossover / gamma;
  const LangevinCovariance below = langevin_covariance(at * (1.0 - 1e-13), gamma, 1.0);
  const LangevinCovariance above = langevin_covariance(at * (1.0 + 1e-13), gamma, 1.0);
  const double jump = std::max({std::abs(below.yy / above.yy - 1.0), std::abs(below.yv / above.yv - 1.0),
                                std::abs(below.vv / above.vv - 1.0)});
  return {"covariance_series_continuity", {Check::at_most("max_rel_jump", jump, 1e-9)},
          "series/closed-form switch at gamma*delta = 0.5"};
}

DiagnosticReport perm_symmetry(const ValidationOptions& opt, Rng& rng) {
  const NoiseModel noise = NoiseModel::homogeneous(0.8, 3, 2);
  const GaussianMDensity model(GaussianMixturePrior({0.4, 0.6}, {Vec::Constant(2, -1.0), Vec::Constant(2, 2.0)},
                                                    {0.3, 0.5}),
                               noise);
  const ScoreSource src = maybe_corrupt(model.score_source(), noise, opt.corrupt_score);
  return named(perm_check(src, noise, draw_points(model.prior(), noise, 50, rng), 0, rng), "perm_symmetry");
}

DiagnosticReport sampler_moments(const ValidationOptions& opt, Rng& rng, Integrator integrator) {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 1, 8);
  const ScoreFn score = [](const MultiY& y) -> Vec { return -y.data(); };
  const SamplerParams params{0.1, integrator == Integrator::cheng ? 2.0 : 1.0, 1.0, opt.sampler_steps};
  constexpr long kThin = 10;
  const long burn = std::min<long>(2000, params.K / 10);
  ChainState state = init_chain(noise, InitScheme::uniform, rng);
  Eigen::MatrixXd samples((params.K - burn) / kThin, noise.dim());
  long row = 0;
  for (long k = 1; k <= params.K; ++k) {
    state = integrator_step(integrator, std::move(state), score, params, rng);
    if (k > burn && (k - burn) % kThin == 0 && row < samples.rows()) samples.row(row++) = state.y.data().transpose();
  }
  const long n = noise.dim();
  return named(chain_moment_test(samples.topRows(row), Vec::Zero(n), Vec::Ones(n), 3.0, 0.10),
               integrator == Integrator::cheng ? "sampler_moments_cheng" : "sampler_moments_sachs");
}

DiagnosticReport kl_nonnegative(Rng& rng) {
  double min_kl = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec mu = rng.normal_vector(4);
    const Vec logvar = 2.0 * rng.normal_vector(4);
    min_kl = std::min(min_kl, kl_diag_gaussian(mu, logvar));
  }
  const double at_prior = kl_diag_gaussian(Vec::Zero(4), Vec::Zero(4));
  return {"kl_nonnegativity",
          {Check::at_least("min_kl_random", min_kl, 0.0), Check::at_most("kl_at_prior", std::abs(at_prior), 0.0)},
          "1000 random (mu, logvar) in R^4"};
}

}  // namespace

std::vector<DiagnosticReport> run_validation_suite(const ValidationOptions& opt) {
  const Rng root(opt.seed);
  std::uint64_t stream = 0;
  auto next = [&] { return root.split(stream++); };

  std::vector<DiagnosticReport> out;
  {
    Rng r = next();
    out.push_back(closed_form_agreement(opt, r));
  }
  {
    Rng r = next();
    out.push_back(sigma_limit_recovery(r));
  }
  {
    Rng r = next();
    out.push_back(cross_channel_consistency(opt, r));
  }
  {
    Rng r = next();
    out.push_back(fd_score(opt, r, false));
  }
  {
    Rng r = next();
    out.push_back(fd_score(opt, r, true));
  }
  {
    Rng r = next();
    out.push_back(fd_mlp_gradient(r));
  }
  {
    Rng r = next();
    out.push_back(poisson_robbins(r));
  }
  out.push_back(poisson_normalization());
  {
    Rng r = next();
    out.push_back(mdsm_neb(opt, r));
  }
  {
    Rng r = next();
    out.push_back(cholesky_reconstruction(r));
  }
  out.push_back(covariance_taylor());
  out.push_back(covariance_continuity());
  {
    Rng r = next();
    out.push_back(perm_symmetry(opt, r));
  }
  {
    Rng r = next();
    out.push_back(named(concentration_report(NoiseModel::homogeneous(1.0, 16, 1000), opt.concentration_trials, r),
                        "concentration"));
  }
  {
    Rng r = next();
    out.push_back(named(congruence_report(NoiseModel::homogeneous(0.25, 1, 1000),
                                          NoiseModel::homogeneous(1.0, 16, 1000), opt.concentration_trials, r),
                        "congruence"));
  }
  {
    Rng r = next();
    out.push_back(sampler_moments(opt, r, Integrator::sachs));
  }
  {
    Rng r = next();
    out.push_back(sampler_moments(opt, r, Integrator::cheng));
  }
  {
    Rng r = next();
    out.push_back(kl_nonnegative(r));
  }
  return out;
}

}  // namespace mdensity
