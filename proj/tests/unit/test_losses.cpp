#include <doctest.h>

#include <cmath>

#include "mdensity/analytic.hpp"
#include "mdensity/estimators.hpp"
#include "mdensity/losses.hpp"

using namespace mdensity;

namespace {

GaussianMDensity mixture_model(const NoiseModel& noise) {
  return GaussianMDensity(GaussianMixturePrior({0.5, 0.5}, {Vec::Constant(noise.d(), -1.0), Vec::Constant(noise.d(), 1.5)},
                                               {0.3, 0.4}),
                          noise);
}

}  // namespace

TEST_CASE("NEB loss examples") {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 2, 1);
  const MultiY y(Vec::Ones(2), noise);
  const Vec x = Vec::Zero(1);
  const ChannelEstimator cheat = [&](const MultiY&, int) { return x; };
  CHECK(neb_loss_channel(cheat, x, y, 0) == 0.0);
  const ChannelEstimator one = [](const MultiY&, int) { return Vec::Ones(1); };
  CHECK(neb_loss_channel(one, x, y, 1) == 1.0);
  CHECK(neb_loss(one, x, y) == 1.0);
  const NoiseModel single({0.5}, 2);
  const MultiY y1(Vec::Constant(2, 0.3), single);
  const ChannelEstimator id = [](const MultiY& yy, int m) { return Vec(yy.channel(m)); };
  CHECK(neb_loss(id, Vec::Zero(2), y1) == neb_loss_channel(id, Vec::Zero(2), y1, 0));
}

TEST_CASE("Bayes estimator risk is below the plug-in risk") {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 2, 1);
  const GaussianMDensity model(GaussianMixturePrior::symmetric_1d(2.0, 0.1), noise);
  const ChannelEstimator bayes = estimator_from_score(model.score_source(), noise);
  const ChannelEstimator plug = [&](const MultiY& y, int) { return plugin_estimate(noise, y); };
  Rng rng(1);
  double rb = 0.0, rp = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec x = model.prior().sample(rng);
    const MultiY y = sample_mnm(x, noise, rng);
    rb += neb_loss(bayes, x, y);
    rp += neb_loss(plug, x, y);
  }
  CHECK(rb < rp);
}

TEST_CASE("MDSM equals (M / sigma^4) NEB for homogeneous models") {
  Rng rng(2);
  for (int M : {1, 2, 5}) {
    const double sigma = 0.6;
    const NoiseModel noise = NoiseModel::homogeneous(sigma, M, 2);
    const GaussianMDensity model = mixture_model(noise);
    ScoreSource src = model.score_source();
    const ScoreFn exact = src.score;
    src.score = [exact](const MultiY& y) -> Vec { return exact(y) + 0.2 * y.data().array().cos().matrix(); };
    const ChannelEstimator est = estimator_from_score(src, noise);
    for (int i = 0; i < 200; ++i) {
      const Vec x = model.prior().sample(rng);
      const MultiY y = sample_mnm(x, noise, rng);
      const double mdsm = mdsm_loss(src.score, x, y, noise);
      const double neb = neb_loss(est, x, y);
      CHECK(std::abs(mdsm - M / std::pow(sigma, 4) * neb) < 1e-10 * mdsm);
    }
  }
}

TEST_CASE("MDSM optimum and single-channel DSM residual") {
  const double sigma = 0.5;
  const NoiseModel noise = NoiseModel::homogeneous(sigma, 3, 2);
  Rng rng(3);
  const Vec x = rng.normal_vector(2);
  const MultiY y = sample_mnm(x, noise, rng);
  const ScoreFn target = [&](const MultiY& yy) -> Vec { return (tile(x, 3) - yy.data()) / (sigma * sigma); };
  CHECK(mdsm_loss(target, x, y, noise) < 1e-20);
  const NoiseModel one({sigma}, 2);
  const MultiY y1 = sample_mnm(x, one, rng);
  const ScoreFn s = [](const MultiY& yy) -> Vec { return -yy.data(); };
  const Vec dsm = -y1.data() + (y1.data() - x) / (sigma * sigma);
  CHECK(mdsm_loss(s, x, y1, one) == doctest::Approx(dsm.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("MDAE loss") {
  const NoiseModel noise({0.5, 1.0, 2.0}, 2);
  Rng rng(4);
  const Vec x = rng.normal_vector(2);
  const NuFn identity = [](const MultiY& y) { return y.data(); };
  double acc = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) acc += mdae_loss(identity, x, sample_mnm(x, noise, rng));
  CHECK(acc / n == doctest::Approx(2.0 * (0.25 + 1.0 + 4.0) / 3.0).epsilon(0.02));

  const NoiseModel hom = NoiseModel::homogeneous(1.0, 4, 1);
  const NuFn plug = [&](const MultiY& y) { return tile(plugin_estimate(hom, y), 4); };
  acc = 0.0;
  for (int i = 0; i < n; ++i) acc += mdae_loss(plug, Vec::Zero(1), sample_mnm(Vec::Zero(1), hom, rng));
  CHECK(acc / n == doctest::Approx(0.25).epsilon(0.03));

  // equals NEB when est(y, m) = nu_m(y)
  const GaussianMDensity model = mixture_model(noise);
  const NuFn nu = [&](const MultiY& y) -> Vec { return tile(model.bayes_estimate(y), 3) + 0.1 * y.data(); };
  const ChannelEstimator est = [&](const MultiY& y, int m) -> Vec { return nu(y).segment(2 * m, 2); };
  const MultiY y = sample_mnm(x, noise, rng);
  CHECK(mdae_loss(nu, x, y) == doctest::Approx(neb_loss(est, x, y)).epsilon(1e-14));
  CHECK_THROWS(mdae_loss(Vec::Zero(5), x, 3));
}

TEST_CASE("MDAE loss is invariant under joint channel permutation") {
  const NoiseModel noise = NoiseModel::homogeneous(0.8, 3, 1);
  Rng rng(5);
  const Vec x = rng.normal_vector(1);
  const Vec nu = rng.normal_vector(3);
  Vec permuted(3);
  permuted << nu[2], nu[0], nu[1];
  CHECK(mdae_loss(nu, x, 3) == doctest::Approx(mdae_loss(permuted, x, 3)).epsilon(1e-15));
}

TEST_CASE("score_from_nu inverts the estimator map") {
  const NoiseModel noise({0.4, 0.9}, 2);
  const GaussianMDensity model = mixture_model(noise);
  const NuFn nu = [&](const MultiY& y) { return tile(model.bayes_estimate(y), 2); };
  const ScoreSource src = score_from_nu(nu, noise);
  CHECK_FALSE(src.has_log_density());
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const MultiY y = sample_mnm(model.prior().sample(rng), noise, rng);
    CHECK((src.score(y) - model.score(y)).cwiseAbs().maxCoeff() < 1e-10);
  }
  const ScoreSource zero = score_from_nu([](const MultiY& y) { return y.data(); }, noise);
  CHECK(zero.score(MultiY(rng.normal_vector(4), noise)).isZero(0.0));
}

TEST_CASE("MEM2 energy") {
  EnergyHandles h;
  h.nu = [](const MultiY& y) { return y.data(); };
  const MultiY y(Vec::Constant(1, 2.0), 1, 1);
  CHECK(mem2_energy(h, y, 1.0) == 0.0);
  h.nu = [](const MultiY&) { return Vec::Zero(1); };
  CHECK(mem2_energy(h, y, 1.0) == 2.0);
  h.h = [](const MultiY&, const Vec&) { return 0.5; };
  CHECK(mem2_energy(h, y, 1.0) == 2.5);
}

TEST_CASE("KL of a diagonal Gaussian") {
  CHECK(kl_diag_gaussian(Vec::Zero(3), Vec::Zero(3)) == 0.0);
  CHECK(kl_diag_gaussian(Vec::Ones(1), Vec::Zero(1)) == doctest::Approx(0.5));
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) CHECK(kl_diag_gaussian(rng.normal_vector(3), 2.0 * rng.normal_vector(3)) > 0.0);
}

TEST_CASE("MUVB energy") {
  const MultiY y(Vec::Constant(2, 0.4), 1, 2);
  EnergyHandles h;
  h.encoder = [](const MultiY&) { return LatentGaussian{Vec::Constant(2, 0.3), Vec::Constant(2, -30.0)}; };
  h.decoder = [](const Vec& z) { return 2.0 * z; };
  std::vector<double> vals;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(s);
    vals.push_back(muvb_energy(h, y, 0.5, rng));
  }
  double mean = 0.0, var = 0.0;
  for (double v : vals) mean += v / 10;
  for (double v : vals) var += (v - mean) * (v - mean) / 9;
  CHECK(var < 1e-8);

  EnergyHandles kl_only;
  kl_only.encoder = [](const MultiY&) { return LatentGaussian{Vec::Constant(2, 0.7), Vec::Constant(2, 0.2)}; };
  kl_only.decoder = [&](const Vec&) { return y.data(); };
  Rng rng(1);
  CHECK(muvb_energy(kl_only, y, 1.0, rng) ==
        doctest::Approx(kl_diag_gaussian(Vec::Constant(2, 0.7), Vec::Constant(2, 0.2))).epsilon(1e-15));

  EnergyHandles toy;
  toy.encoder = [](const MultiY& yy) { return LatentGaussian{yy.data(), Vec::Constant(2, -0.5)}; };
  toy.decoder = [](const Vec& z) { return Vec(z.array().sin()); };
  Rng a(2), b(3);
  const MonteCarloEstimate small = muvb_energy_estimate(toy, y, 0.3, a, 10000);
  const MonteCarloEstimate big = muvb_energy_estimate(toy, y, 0.3, b, 100000);
  CHECK(std::abs(small.value - big.value) < 3.0 * std::hypot(small.std_error, big.std_error));
  CHECK(small.std_error > 0.0);
  Rng c(4);
  CHECK_THROWS(muvb_energy_estimate(toy, y, 0.3, c, 0));
}
