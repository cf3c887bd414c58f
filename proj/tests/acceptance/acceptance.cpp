// Acceptance battery: one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]   (all criteria when N is omitted)

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mdensity/analytic.hpp"
#include "mdensity/diagnostics.hpp"
#include "mdensity/estimators.hpp"
#include "mdensity/losses.hpp"
#include "mdensity/mlp.hpp"
#include "mdensity/samplers.hpp"
#include "mdensity/stats.hpp"
#include "mdensity/train.hpp"

using namespace mdensity;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  std::copy(xs.begin(), xs.end(), v.data());
  return v;
}

// Posterior mean of x for a single isotropic Gaussian prior N(mu, s^2 I):
// precision-weighted average of the prior mean and every channel.
Vec oracle_posterior_mean(const Vec& mu, double s, const NoiseModel& noise, const MultiY& y) {
  Vec num = mu / (s * s);
  double prec = 1.0 / (s * s);
  for (int m = 0; m < noise.M(); ++m) {
    const double w = 1.0 / (noise.sigma(m) * noise.sigma(m));
    num += w * Vec(y.channel(m));
    prec += w;
  }
  return num / prec;
}

// 4x4 matrix exponential by scaling and squaring, long double Taylor.
using M4 = std::array<std::array<long double, 4>, 4>;

M4 mul(const M4& a, const M4& b) {
  M4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

M4 expm(M4 a) {
  long double norm = 0;
  for (auto& r : a)
    for (long double x : r) norm = std::max(norm, std::fabs(x));
  int squarings = 0;
  while (norm > 0.01L) norm /= 2, ++squarings;
  for (auto& r : a)
    for (long double& x : r) x = std::ldexp(x, -squarings);
  M4 result{}, term{};
  for (int i = 0; i < 4; ++i) result[i][i] = term[i][i] = 1;
  for (int n = 1; n <= 20; ++n) {
    term = mul(term, a);
    for (auto& r : term)
      for (long double& x : r) x /= n;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) result[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) result = mul(result, result);
  return result;
}

// Van Loan: exp([[-A, Q], [0, A^T]] delta) = [[., G], [0, F]], Sigma = F^T G,
// for the OU dynamics A = [[0, 1], [0, -gamma]], Q = diag(0, 2 gamma u).
LangevinCovariance oracle_covariance(double delta, double gamma, double u) {
  M4 c{};
  c[0][1] = -delta;
  c[1][1] = gamma * delta;
  c[1][3] = 2.0L * gamma * u * delta;
  c[2][2] = 0;
  c[3][2] = delta;
  c[3][3] = -gamma * delta;
  const M4 e = expm(c);
  long double sigma[2][2] = {};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) sigma[i][j] += e[2 + k][2 + i] * e[k][2 + j];
  return {static_cast<double>(sigma[0][0]), static_cast<double>(sigma[0][1]), static_cast<double>(sigma[1][1])};
}

std::vector<MultiY> draw(const GaussianMixturePrior& prior, const NoiseModel& noise, int n, Rng& rng) {
  std::vector<MultiY> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_mnm(prior.sample(rng), noise, rng));
  return out;
}

Verdict closed_form_agreement() {
  Rng rng(101);
  const NoiseModel noise({0.5, 1.0, 2.0}, 3);
  const Vec mu = vec({0.3, -1.0, 2.0});
  const GaussianMDensity model(GaussianMixturePrior({1.0}, {mu}, {0.8}), noise);
  const ScoreSource src = model.score_source();
  double worst = 0.0, worst_oracle = 0.0;
  for (const MultiY& y : draw(model.prior(), noise, 1000, rng)) {
    const Vec closed = model.tilde_y(0, y) / model.components()[0].z;
    worst_oracle = std::max(worst_oracle, (closed - oracle_posterior_mean(mu, 0.8, noise, y)).cwiseAbs().maxCoeff());
    for (int m = 0; m < noise.M(); ++m)
      worst = std::max(worst, (bayes_estimate_channel(src, noise, y, m) - closed).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-10 && worst_oracle < 1e-10,
          fmt("max |y_m + s_m^2 grad_m log p - ytilde/Z| = %.3g, max |ytilde/Z - posterior mean| = %.3g (< 1e-10)",
              worst, worst_oracle)};
}

Verdict sigma_limit() {
  Rng rng(102);
  const NoiseModel noise({1e-8, 1.0}, 2);
  const GaussianMDensity model(GaussianMixturePrior({1.0}, {vec({0.5, -0.5})}, {1.0}), noise);
  double worst = 0.0;
  for (const MultiY& y : draw(model.prior(), noise, 100, rng))
    worst = std::max(worst, (model.bayes_estimate(y) - Vec(y.channel(0))).norm());
  return {worst < 1e-6, fmt("max ||xhat(y1,y2) - y1|| = %.3g over 100 points (< 1e-6)", worst)};
}

Verdict poisson_identities() {
  Rng rng(103);
  double worst = 0.0;
  for (int M : {1, 2, 4}) {
    const PoissonExpMDensity model(M);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> y(static_cast<std::size_t>(M));
      for (double& v : y) v = std::floor(rng.uniform() * 40.0);
      const double S = std::accumulate(y.begin(), y.end(), 0.0);
      const double closed = (S + 1.0) / (M + 1.0);
      worst = std::max(worst, std::abs(poisson_estimate(model, y) - closed) / closed);
      for (int m = 0; m < M; ++m) {
        std::vector<double> up = y;
        up[static_cast<std::size_t>(m)] += 1.0;
        const double robbins = (y[static_cast<std::size_t>(m)] + 1.0) *
                               std::exp(poisson_log_mdensity(model, up) - poisson_log_mdensity(model, y));
        worst = std::max(worst, std::abs(robbins - closed) / closed);
        worst = std::max(worst, std::abs(poisson_robbins_estimate(model, y, m) - closed) / closed);
      }
    }
  }
  const PoissonExpMDensity two(2);
  double mass = 0.0;
  for (int s = 0; s <= 80; ++s)
    for (int a = 0; a <= s; ++a) {
      const double y[2] = {double(a), double(s - a)};
      mass += std::exp(poisson_log_mdensity(two, y));
    }
  return {worst < 1e-12 && std::abs(mass - 1.0) < 1e-9,
          fmt("max rel |robbins - (S+1)/(M+1)| = %.3g (< 1e-12); M=2 truncated mass - 1 = %.3g (< 1e-9)", worst,
              mass - 1.0)};
}

Verdict mdsm_neb() {
  Rng rng(104);
  const double sigma = 0.7;
  const NoiseModel noise = NoiseModel::homogeneous(sigma, 3, 2);
  const GaussianMDensity model(
      GaussianMixturePrior({0.5, 0.5}, {vec({-1.0, 1.0}), vec({1.0, 0.5})}, {0.3, 0.4}), noise);
  ScoreSource src = model.score_source();
  const ScoreFn exact = src.score;
  src.score = [exact](const MultiY& y) -> Vec { return exact(y) + 0.1 * y.data().array().sin().matrix(); };
  const ChannelEstimator est = estimator_from_score(src, noise);
  const double factor = noise.M() / std::pow(sigma, 4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x = model.prior().sample(rng);
    const MultiY y = sample_mnm(x, noise, rng);
    const double mdsm = mdsm_loss(src.score, x, y, noise);
    worst = std::max(worst, std::abs(mdsm - factor * neb_loss(est, x, y)) / mdsm);
  }
  return {worst < 1e-10, fmt("max rel |mdsm - (M/sigma^4) neb| = %.3g over 1000 pairs (< 1e-10)", worst)};
}

Verdict score_correctness() {
  Rng rng(105);
  const GaussianMDensity single(GaussianMixturePrior({1.0}, {vec({0.5, -0.2})}, {1.0}), NoiseModel({0.5, 1.0, 2.0}, 2));
  const GaussianMDensity mixture(GaussianMixturePrior::symmetric_1d(2.0, 0.1), NoiseModel::homogeneous(1.0, 2, 1));
  const DiagnosticReport a = fd_score_check(single.score_source(), draw(single.prior(), single.noise(), 100, rng));
  const DiagnosticReport b = fd_score_check(mixture.score_source(), draw(mixture.prior(), mixture.noise(), 100, rng));

  const NoiseModel noise = NoiseModel::homogeneous(0.5, 4, 1);
  MlpScoreNet net({4, 32, 32, 4}, noise, rng);
  for (auto& bias : net.params().biases) bias = 0.1 * rng.normal_vector(bias.size());
  const double h = 1e-5;
  double worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    const Vec x = rng.normal_vector(1);
    const MultiY y = sample_mnm(x, noise, rng);
    const MdaeGradient g = grad_mdae(net, x, y);
    MlpScoreNet probe = net;
    auto check = [&](double& param, double analytic) {
      const double orig = param;
      param = orig + h;
      const double up = mdae_loss(probe.forward(y), x, noise.M());
      param = orig - h;
      const double down = mdae_loss(probe.forward(y), x, noise.M());
      param = orig;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
    };
    for (std::size_t l = 0; l < net.params().weights.size(); ++l) {
      for (Eigen::Index i = 0; i < net.params().weights[l].size(); ++i)
        check(probe.params().weights[l].data()[i], g.grads.weights[l].data()[i]);
      for (Eigen::Index i = 0; i < net.params().biases[l].size(); ++i)
        check(probe.params().biases[l][i], g.grads.biases[l][i]);
    }
  }
  const double fa = a.checks.front().value, fb = b.checks.front().value;
  return {fa < 1e-5 && fb < 1e-5 && worst < 1e-4,
          fmt("score FD rel error single %.3g, mixture %.3g (< 1e-5); net gradient FD rel error %.3g (< 1e-4)", fa,
              fb, worst)};
}

Verdict cholesky() {
  Rng rng(106);
  double recon = 0.0, oracle = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double delta = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
    const double gamma = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    const double u = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    const LangevinCovariance cov = langevin_covariance(delta, gamma, u);
    const LangevinCovariance ref = oracle_covariance(delta, gamma, u);
    const CovCholesky L = cheng_cov_chol(delta, gamma, u);
    recon = std::max({recon, std::abs(L.yy * L.yy - cov.yy) / cov.yy, std::abs(L.yy * L.vy - cov.yv) / cov.yv,
                      std::abs(L.vy * L.vy + L.vv * L.vv - cov.vv) / cov.vv});
    oracle = std::max({oracle, std::abs(cov.yy / ref.yy - 1.0), std::abs(cov.yv / ref.yv - 1.0),
                       std::abs(cov.vv / ref.vv - 1.0)});
  }
  const double d = 1e-3;
  const LangevinCovariance small = langevin_covariance(d, 1.0, 1.0);
  const double taylor = std::max({std::abs(small.yy / (2.0 / 3.0 * d * d * d) - 1.0),
                                  std::abs(small.vv / (2.0 * d) - 1.0), std::abs(small.yv / (d * d) - 1.0)});
  return {recon < 1e-12 && oracle < 1e-12 && taylor < 0.01,
          fmt("L L^T rel error %.3g, Sigma vs matrix-exponential oracle %.3g (< 1e-12); Taylor limits rel gap %.3g "
              "(< 1%%)",
              recon, oracle, taylor)};
}

Verdict stationarity() {
  const int n = 32;
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 1, n);
  const ScoreFn score = [](const MultiY& y) -> Vec { return -y.data(); };
  bool pass = true;
  std::string detail;
  for (Integrator integ : {Integrator::sachs, Integrator::cheng}) {
    const SamplerParams params{0.05, integ == Integrator::cheng ? 2.0 : 1.0, 1.0, 1'000'000};
    Rng rng(integ == Integrator::cheng ? 108 : 107);
    constexpr long kThin = 10, kBurn = 5000;
    ChainState state = init_chain(noise, InitScheme::uniform, rng);
    Eigen::MatrixXd samples((params.K - kBurn) / kThin, n);
    long row = 0;
    for (long k = 1; k <= params.K; ++k) {
      state = integrator_step(integ, std::move(state), score, params, rng);
      if (k > kBurn && (k - kBurn) % kThin == 0) samples.row(row++) = state.y.data().transpose();
    }
    const DiagnosticReport r = chain_moment_test(samples.topRows(row), Vec::Zero(n), Vec::Ones(n), 3.0, 0.05);
    pass = pass && r.passed();
    detail += fmt("%s: max |z| %.3f (< 3), max |var - 1| %.4f (<= 0.05); ", std::string(to_string(integ)).c_str(),
                  r.checks[0].value, r.checks[1].value);
  }
  return {pass, detail + "32 dims, delta 0.05, 1e6 steps"};
}

Verdict distribution_recovery() {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 2, 1);
  const GaussianMixturePrior prior = GaussianMixturePrior::symmetric_1d(2.0, 0.1);
  const GaussianMDensity model(prior, noise);
  const SamplerParams params{0.5, 0.5, 1.0, 100'000};
  WalkJumpOptions opt;
  opt.integrator = Integrator::sachs;
  opt.keep_records = false;
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(params.K) + 1);
  opt.on_jump = [&](const WJSRecord& r) { xs.push_back(r.xhat[0]); };
  Rng rng(109);
  walk_jump(model.score_source(), noise, params, opt, rng);

  const double ks = ks_1d(xs, [&](double x) { return prior.cdf_1d(x); });
  const double right = static_cast<double>(std::count_if(xs.begin(), xs.end(), [](double x) { return x > 0; })) /
                       static_cast<double>(xs.size());
  long visits[2] = {0, 0};
  int side = -1;
  for (double x : xs) {
    const int s = x > 0 ? 1 : 0;
    if (s != side) ++visits[s], side = s;
  }
  // reference: the exact law of xhat(y) under y ~ p(y), which the jumps target
  Rng ref_rng(110);
  std::vector<double> pushforward;
  for (int i = 0; i < 100'000; ++i) pushforward.push_back(model.bayes_estimate(sample_mnm(prior.sample(ref_rng), noise, ref_rng))[0]);
  const double ks_ref = ks_1d(pushforward, [&](double x) { return prior.cdf_1d(x); });
  const double ks_push = ks_two_sample(xs, pushforward).statistic;

  const bool pass = ks < 0.02 && std::abs(right - 0.5) <= 0.03 && visits[0] >= 100 && visits[1] >= 100;
  return {pass, fmt("KS vs prior %.4f (< 0.02); mode weight %.4f (0.5 +- 0.03); visits %ld / %ld (>= 100); "
                    "reference: exact xhat(y) draws have KS vs prior %.4f, chain vs those draws KS %.4f",
                    ks, right, visits[0], visits[1], ks_ref, ks_push)};
}

Verdict concentration() {
  Rng rng(111);
  const NoiseModel wide = NoiseModel::homogeneous(1.0, 16, 1000);
  const std::vector<double> norms = plugin_error_norms(wide, 10'000, rng);
  const double target = 0.25 * std::sqrt(1000.0);
  const double gap = std::abs(mean(norms) / target - 1.0);
  const std::vector<double> single = plugin_error_norms(NoiseModel::homogeneous(0.25, 1, 1000), 10'000, rng);
  const double p = ks_two_sample(norms, single).p_value;
  return {gap <= 0.01 && p > 0.01,
          fmt("mean ||x - plugin|| / (sigma_eff sqrt d) - 1 = %.4f (within 1%%); congruence KS p = %.3f (> 0.01)",
              mean(norms) / target - 1.0, p)};
}

Verdict learning() {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 4, 1);
  const ToyDataset data = ToyDataset::gaussian_mixture(GaussianMixturePrior::symmetric_1d(2.0, 0.1));
  Rng init(201), rng(202);
  const MlpScoreNet net(MlpScoreNet::default_widths(noise), noise, init);
  const TrainResult result = train_mdae(data, noise, net, TrainOptions{20000, 128, 1e-3}, rng);
  Rng eval(203);
  const double heldout = evaluate_mdae(result.net, data, 20000, eval);
  const double baseline = 1.0 / 4.0;
  const double risk = bayes_risk_1d(GaussianMDensity(*data.prior(), noise));
  const ScoreSource src = score_from_nu(result.net.as_nu(), noise);
  Rng gap_rng(204);
  double acc = 0.0;
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    const double g = bayes_estimate_mean(src, noise, sample_mnm(data.sample(gap_rng), noise, gap_rng)).consistency_gap;
    acc += g * g;
  }
  const double rms = std::sqrt(acc / n);
  const bool pass = heldout < baseline && std::abs(heldout / risk - 1.0) <= 0.15 && rms < 0.1;
  return {pass, fmt("held-out loss %.5f (< baseline %.3f), Bayes risk %.5f, ratio %.4f (within 15%%); RMS "
                    "consistency gap %.4f (< 0.1)",
                    heldout, baseline, risk, heldout / risk, rms)};
}

Verdict read_only_jump() {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 2, 1);
  const GaussianMDensity model(GaussianMixturePrior::symmetric_1d(2.0, 0.1), noise);
  bool pass = true;
  std::string detail;
  for (Integrator integ : {Integrator::sachs, Integrator::cheng}) {
    std::vector<std::vector<double>> runs;
    for (long dk : {1L, 10L, 100L}) {
      std::vector<double> traj;
      WalkJumpOptions opt;
      opt.integrator = integ;
      opt.jump_every = dk;
      opt.keep_records = false;
      opt.on_step = [&](const ChainState& s) {
        traj.insert(traj.end(), s.y.data().data(), s.y.data().data() + s.y.data().size());
        traj.insert(traj.end(), s.v.data(), s.v.data() + s.v.size());
      };
      Rng rng(112);
      walk_jump(model.score_source(), noise, {0.5, 0.5, 1.0, 20000}, opt, rng);
      runs.push_back(std::move(traj));
    }
    for (const auto& r : runs)
      pass = pass && r.size() == runs[0].size() &&
             std::memcmp(r.data(), runs[0].data(), r.size() * sizeof(double)) == 0;
    detail += std::string(to_string(integ)) + " ";
  }
  return {pass, "trajectories for jump_every in {1, 10, 100} byte-identical (" + detail + "integrators, 2e4 steps)"};
}

Verdict permutation() {
  Rng rng(113);
  const NoiseModel noise = NoiseModel::homogeneous(0.8, 2, 2);
  const GaussianMDensity model(
      GaussianMixturePrior({0.4, 0.6}, {vec({-1.0, 0.5}), vec({2.0, -1.0})}, {0.3, 0.5}), noise);
  double worst_log = 0.0, worst_score = 0.0;
  const std::vector<std::vector<int>> perms = {{0, 1}, {1, 0}};
  for (const MultiY& y : draw(model.prior(), noise, 100, rng)) {
    const double lp = model.log_density(y);
    const Vec s = model.score(y);
    for (const auto& perm : perms) {
      const MultiY yp = permute_channels(y, perm);
      worst_log = std::max(worst_log, std::abs(model.log_density(yp) - lp));
      worst_score = std::max(worst_score,
                             (model.score(yp) - permute_channels(s, noise.M(), noise.d(), perm)).cwiseAbs().maxCoeff());
    }
  }
  return {worst_log < 1e-10 && worst_score < 1e-10,
          fmt("max |log p(y_pi) - log p(y)| = %.3g, max score equivariance error %.3g (< 1e-10)", worst_log,
              worst_score)};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"closed-form agreement", 1, closed_form_agreement},
      {"sigma_1 -> 0 recovery", 1, sigma_limit},
      {"Poisson identities", 5, poisson_identities},
      {"MDSM = NEB", 1, mdsm_neb},
      {"score correctness", 10, score_correctness},
      {"covariance Cholesky and Taylor limits", 1, cholesky},
      {"sampler stationarity", 120, stationarity},
      {"walk-jump distribution recovery", 60, distribution_recovery},
      {"plug-in concentration", 30, concentration},
      {"MDAE learning beats plug-in", 600, learning},
      {"jump is read-only", 10, read_only_jump},
      {"permutation symmetry", 1, permutation},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (std::size_t i = 0; i < criteria().size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (only != 0 && number != only) continue;
    const Criterion& c = criteria()[i];
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = v.pass && in_time;
    std::printf("%s criterion %d (%s): %s; runtime %.2f s (< %g s)\n", pass ? "PASS" : "FAIL", number, c.name,
                v.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
    failed += !pass;
  }
  return failed == 0 ? 0 : 1;
}
