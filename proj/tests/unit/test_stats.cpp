#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdensity/rng.hpp"
#include "mdensity/stats.hpp"

using namespace mdensity;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> normals(std::uint64_t seed, int n, double shift = 0.0) {
  Rng rng(seed);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (double& x : xs) x = rng.normal() + shift;
  return xs;
}

}  // namespace

TEST_CASE("one-sample KS") {
  const auto xs = normals(1, 10000);
  const double D = ks_1d(xs, normal_cdf);
  CHECK(D < 2.0 / std::sqrt(10000.0));
  CHECK(D > 0.0);
  // brute-force oracle
  std::vector<double> s = xs;
  std::sort(s.begin(), s.end());
  double brute = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = normal_cdf(s[i]);
    brute = std::max({brute, (i + 1.0) / s.size() - F, F - double(i) / s.size()});
  }
  CHECK(D == doctest::Approx(brute).epsilon(1e-14));
  const std::vector<double> constant(100, 0.3);
  CHECK(ks_1d(constant, normal_cdf) == doctest::Approx(std::max(normal_cdf(0.3), 1.0 - normal_cdf(0.3))));
}

TEST_CASE("two-sample KS") {
  const auto a = normals(2, 5000), b = normals(3, 5000), c = normals(4, 5000, 0.2);
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(ks_two_sample(x, y).statistic == 1.0);
  // Kolmogorov survival: known value Q(1) = 0.26999967...
  CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.2699996716735).epsilon(1e-9));
  CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("p-values are roughly uniform under the null") {
  int below = 0;
  for (std::uint64_t s = 0; s < 200; ++s) below += ks_two_sample(normals(100 + s, 400), normals(1000 + s, 400)).p_value < 0.1;
  CHECK(below >= 6);
  CHECK(below <= 36);
}

TEST_CASE("ESS of iid, AR(1) and constant series") {
  const auto iid = normals(5, 20000);
  CHECK(autocorr_ess(iid).ess == doctest::Approx(20000).epsilon(0.2));

  const double rho = 0.9;
  const int n = 200000;
  Rng rng(6);
  std::vector<double> ar(n);
  ar[0] = rng.normal() / std::sqrt(1 - rho * rho);
  for (int i = 1; i < n; ++i) ar[static_cast<std::size_t>(i)] = rho * ar[static_cast<std::size_t>(i - 1)] + rng.normal();
  const AutocorrEss e = autocorr_ess(ar);
  CHECK(e.ess == doctest::Approx(n * (1 - rho) / (1 + rho)).epsilon(0.25));
  CHECK(e.autocorrelation[0] == doctest::Approx(1.0));
  CHECK(e.autocorrelation[1] == doctest::Approx(rho).epsilon(0.02));
  CHECK_FALSE(e.degenerate);

  const AutocorrEss flat = autocorr_ess(std::vector<double>(100, 2.0));
  CHECK(flat.ess == 1.0);
  CHECK(flat.degenerate);
}

TEST_CASE("moments and chi mean") {
  const std::vector<double> xs{1, 2, 3, 4};
  CHECK(mean(xs) == 2.5);
  CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK(chi_mean(1.0, 1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(chi_mean(2.0, 2) == doctest::Approx(2.0 * std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-14));
  CHECK(chi_mean(0.25, 1000) / (0.25 * std::sqrt(1000.0)) == doctest::Approx(1.0).epsilon(1e-3));
}
