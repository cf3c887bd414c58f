#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mdensity/errors.hpp"
#include "mdensity/noise.hpp"
#include "mdensity/stats.hpp"

using namespace mdensity;

TEST_CASE("noise model validation") {
  CHECK_THROWS_AS(NoiseModel({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel({1.0, 0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel({1.0, -2.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel({NAN}, 1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel({1.0}, 0), std::invalid_argument);
  const NoiseModel n({0.5, 0.5, 0.5}, 4);
  CHECK(n.M() == 3);
  CHECK(n.dim() == 12);
  CHECK(n.is_homogeneous());
  CHECK_FALSE(NoiseModel({0.5, std::nextafter(0.5, 1.0)}, 1).is_homogeneous());
}

TEST_CASE("channel layout is channel-major") {
  Vec data(4);
  data << 1, 2, 3, 4;
  const MultiY y(data, 2, 2);
  CHECK(channel(y, 1)[0] == 3);
  CHECK(channel(y, 1)[1] == 4);
  CHECK_THROWS_AS(y.channel(2), std::out_of_range);
  CHECK_THROWS_AS(y.channel(-1), std::out_of_range);
  const MultiY single(data, 1, 4);
  CHECK(channel(single, 0) == data);
  CHECK_THROWS_AS(MultiY(data, 3, 2), DimensionError);
  CHECK_THROWS_AS(require_conforms(y, NoiseModel({1.0}, 4)), DimensionError);
}

TEST_CASE("sigma_eff") {
  CHECK(sigma_eff(NoiseModel({3.0, 4.0}, 1)) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(std::abs(sigma_eff(NoiseModel::homogeneous(1.0, 16, 1)) - 0.25) < 1e-12);
  CHECK(sigma_eff(NoiseModel({0.25}, 3)) == 0.25);
  for (int M : {2, 3, 7, 50}) CHECK(std::abs(sigma_eff(NoiseModel::homogeneous(0.7, M, 1)) - 0.7 / std::sqrt(M)) < 1e-12);
}

TEST_CASE("sample_mnm moments") {
  const int n = 100000;
  Rng rng(11);
  const NoiseModel unit({1.0, 1.0}, 1);
  double s0 = 0, s1 = 0;
  for (int i = 0; i < n; ++i) {
    const MultiY y = sample_mnm(Vec::Zero(1), unit, rng);
    s0 += y.data()[0];
    s1 += y.data()[1];
  }
  CHECK(std::abs(s0 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));

  const NoiseModel het({3.0, 4.0}, 1);
  std::vector<double> c0, c1;
  for (int i = 0; i < n; ++i) {
    const MultiY y = sample_mnm(Vec::Zero(1), het, rng);
    c0.push_back(y.data()[0]);
    c1.push_back(y.data()[1]);
  }
  CHECK(std::abs(variance(c0) / 9.0 - 1.0) < 0.05);
  CHECK(std::abs(variance(c1) / 16.0 - 1.0) < 0.05);
}

TEST_CASE("sample_mnm per-channel statistics in d > 1") {
  const NoiseModel noise({0.5, 2.0}, 3);
  Vec x(3);
  x << 1.0, -2.0, 0.5;
  Rng rng(5);
  const int n = 100000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 2);
  for (int i = 0; i < n; ++i) {
    const Vec r = sample_mnm(x, noise, rng).data() - tile(x, 2);
    acc.col(0) += r;
    acc.col(1) += r.cwiseAbs2();
  }
  for (int m = 0; m < 2; ++m)
    for (int j = 0; j < 3; ++j) {
      const double s2 = noise.sigma(m) * noise.sigma(m);
      CHECK(std::abs(acc(m * 3 + j, 0) / n) < 4.0 * noise.sigma(m) / std::sqrt(n));
      CHECK(std::abs(acc(m * 3 + j, 1) / n / s2 - 1.0) < 0.05);
    }
}

TEST_CASE("homogeneous channels are identically distributed") {
  const NoiseModel noise = NoiseModel::homogeneous(0.8, 3, 1);
  Rng rng(17);
  std::vector<double> a, b;
  for (int i = 0; i < 20000; ++i) {
    const MultiY y = sample_mnm(Vec::Constant(1, 2.0), noise, rng);
    a.push_back(y.data()[0] - 2.0);
    b.push_back(y.data()[2] - 2.0);
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("seeded sampling is deterministic and split streams differ") {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 4, 2);
  Rng a(42), b(42);
  CHECK(sample_mnm(Vec::Ones(2), noise, a).data() == sample_mnm(Vec::Ones(2), noise, b).data());
  const Rng root(42);
  Rng c0 = root.split(0), c0b = root.split(0), c1 = root.split(1);
  const double u0 = c0.uniform();
  CHECK(u0 == c0b.uniform());
  CHECK(u0 != c1.uniform());
}

TEST_CASE("mixture prior validation and density") {
  CHECK_THROWS(GaussianMixturePrior({0.5, 0.4}, {Vec::Zero(1), Vec::Zero(1)}, {1.0, 1.0}));
  CHECK_THROWS(GaussianMixturePrior({0.5, 0.5}, {Vec::Zero(1), Vec::Zero(1)}, {1.0, 0.0}));
  CHECK_THROWS(GaussianMixturePrior({0.5, 0.5}, {Vec::Zero(1), Vec::Zero(2)}, {1.0, 1.0}));
  const GaussianMixturePrior p = GaussianMixturePrior::symmetric_1d(2.0, 0.5);
  const double pi = 3.14159265358979323846;
  for (double x : {-3.0, -0.2, 0.0, 1.7}) {
    const double direct = 0.5 * std::exp(-0.5 * (x - 2) * (x - 2) / 0.25) / std::sqrt(2 * pi * 0.25) +
                          0.5 * std::exp(-0.5 * (x + 2) * (x + 2) / 0.25) / std::sqrt(2 * pi * 0.25);
    CHECK(std::exp(p.log_density(Vec::Constant(1, x))) == doctest::Approx(direct).epsilon(1e-13));
    const double cdf = 0.25 * std::erfc(-(x - 2) / (0.5 * std::sqrt(2.0))) +
                       0.25 * std::erfc(-(x + 2) / (0.5 * std::sqrt(2.0)));
    CHECK(p.cdf_1d(x) == doctest::Approx(cdf).epsilon(1e-13));
  }
  Rng rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 50000; ++i) xs.push_back(p.sample(rng)[0]);
  CHECK(std::abs(mean(xs)) < 0.05);
  CHECK(variance(xs) == doctest::Approx(4.25).epsilon(0.03));
  CHECK(ks_1d(xs, [&](double x) { return p.cdf_1d(x); }) < 0.01);
}
