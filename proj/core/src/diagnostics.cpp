#include "mdensity/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mdensity/errors.hpp"
#include "mdensity/estimators.hpp"

namespace mdensity {

bool Check::passed() const {
  if (!std::isfinite(value)) return false;
  switch (kind) {
    case Kind::at_most: return value <= threshold;
    case Kind::at_least: return value >= threshold;
    case Kind::within: return value >= threshold && value <= upper;
  }
  return false;
}

Check Check::at_most(std::string name, double value, double threshold) {
  return Check{std::move(name), value, threshold, 0.0, Kind::at_most};
}
Check Check::at_least(std::string name, double value, double threshold) {
  return Check{std::move(name), value, threshold, 0.0, Kind::at_least};
}
Check Check::within(std::string name, double value, double lo, double hi) {
  return Check{std::move(name), value, lo, hi, Kind::within};
}

bool DiagnosticReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

namespace {

const char* kind_name(Check::Kind kind) {
  switch (kind) {
    case Check::Kind::at_most: return "at_most";
    case Check::Kind::at_least: return "at_least";
    case Check::Kind::within: return "within";
  }
  return "?";
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_report_csv_header(std::ostream& out) {
  out << "name,check,value,threshold,upper,kind,passed,details\n";
}

void write_report_csv(std::ostream& out, const DiagnosticReport& report) {
  std::ostringstream line;
  line.precision(std::numeric_limits<double>::max_digits10);
  for (const Check& c : report.checks) {
    line << report.name << ',' << c.name << ',' << c.value << ',' << c.threshold << ',' << c.upper << ','
         << kind_name(c.kind) << ',' << (c.passed() ? 1 : 0) << ',' << csv_quote(report.details) << '\n';
  }
  out << line.str();
}

void write_report_text(std::ostream& out, const DiagnosticReport& report) {
  out << (report.passed() ? "[PASS] " : "[FAIL] ") << report.name << '\n';
  for (const Check& c : report.checks) {
    out << "    " << std::left << std::setw(28) << c.name << " = " << std::setprecision(6) << c.value;
    switch (c.kind) {
      case Check::Kind::at_most: out << "  (<= " << c.threshold << ")"; break;
      case Check::Kind::at_least: out << "  (>= " << c.threshold << ")"; break;
      case Check::Kind::within: out << "  (in [" << c.threshold << ", " << c.upper << "])"; break;
    }
    out << (c.passed() ? "" : "  <-- failed") << '\n';
  }
  if (!report.details.empty()) out << "    " << report.details << '\n';
}

Vec fd_gradient(const std::function<double(const MultiY&)>& f, const MultiY& y, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: h must be positive");
  MultiY probe = y;
  Vec grad(y.data().size());
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

ScoreSource score_from_energy(std::function<double(const MultiY&)> energy, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("score_from_energy: h must be positive");
  auto shared = std::make_shared<std::function<double(const MultiY&)>>(std::move(energy));
  ScoreSource src;
  src.score = [shared, h](const MultiY& y) -> Vec { return -fd_gradient(*shared, y, h); };
  src.log_density = [shared](const MultiY& y) { return -(*shared)(y); };
  return src;
}

DiagnosticReport fd_score_check(const ScoreSource& src, const std::vector<MultiY>& points, double h,
                                double threshold) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_score_check: h must be positive");
  if (!src.has_log_density()) throw std::invalid_argument("fd_score_check: source has no log density");
  if (points.empty()) throw std::invalid_argument("fd_score_check: no points");
  double worst = 0.0;
  std::size_t worst_point = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Vec analytic = src.score(points[p]);
    const Vec numeric = fd_gradient(*src.log_density, points[p], h);
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      const double err = std::abs(analytic[i] - numeric[i]) / std::max(std::abs(analytic[i]), 1e-8);
      if (!(err <= worst)) {
        worst = err;
        worst_point = p;
      }
    }
  }
  DiagnosticReport report{"fd_score_check", {Check::at_most("max_rel_error", worst, threshold)}, {}};
  report.details = std::to_string(points.size()) + " points, h=" + std::to_string(h) +
                   ", worst at point " + std::to_string(worst_point);
  return report;
}

std::vector<double> plugin_error_norms(const NoiseModel& noise, long trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("plugin_error_norms: trials must be >= 1");
  std::vector<double> norms(static_cast<std::size_t>(trials));
  const Vec x = Vec::Zero(noise.d());
  for (auto& n : norms) n = plugin_estimate(noise, sample_mnm(x, noise, rng)).norm();
  return norms;
}

DiagnosticReport concentration_report(const NoiseModel& noise, long trials, Rng& rng, double rel_tol) {
  const std::vector<double> norms = plugin_error_norms(noise, trials, rng);
  const double s_eff = sigma_eff(noise);
  const double approx = s_eff * std::sqrt(static_cast<double>(noise.d()));
  const double exact = chi_mean(s_eff, noise.d());
  const bool small_d = noise.d() < 100;
  const double reference = small_d ? exact : approx;

  const double m = mean(norms);
  const double sd = trials > 1 ? std::sqrt(variance(norms)) : 0.0;
  const double standard_error = sd / std::sqrt(static_cast<double>(trials));
  // never demand more than the Monte-Carlo error allows
  const double tol = std::max(rel_tol, 3.0 * standard_error / reference);

  DiagnosticReport report{"concentration", {Check::at_most("rel_error_vs_reference", std::abs(m / reference - 1.0), tol)},
                          {}};
  std::ostringstream details;
  details.precision(6);
  details << "M=" << noise.M() << " d=" << noise.d() << " sigma_eff=" << s_eff << " trials=" << trials
          << " mean=" << m << " std=" << sd << " reference=" << reference
          << (small_d ? " (exact chi mean)" : " (sigma_eff*sqrt(d))") << " sigma_eff*sqrt(d)=" << approx;
  if (small_d && std::abs(exact / approx - 1.0) > 0.01)
    details << "; note: sigma_eff*sqrt(d) is off by " << 100.0 * std::abs(exact / approx - 1.0)
            << "% at this d (expected for small d)";
  report.details = details.str();
  return report;
}

DiagnosticReport congruence_report(const NoiseModel& a, const NoiseModel& b, long trials, Rng& rng,
                                   double min_p_value) {
  if (a.d() != b.d()) throw DimensionError("congruence_report: models differ in d");
  Rng rng_a = rng.split(0);
  Rng rng_b = rng.split(1);
  const std::vector<double> na = plugin_error_norms(a, trials, rng_a);
  const std::vector<double> nb = plugin_error_norms(b, trials, rng_b);
  const KsTwoSample ks = ks_two_sample(na, nb);
  DiagnosticReport report{"congruence", {Check::at_least("ks_p_value", ks.p_value, min_p_value)}, {}};
  std::ostringstream details;
  details.precision(6);
  details << "sigma_eff " << sigma_eff(a) << " vs " << sigma_eff(b) << ", KS statistic " << ks.statistic
          << ", trials " << trials;
  report.details = details.str();
  return report;
}

MultiY permute_channels(const MultiY& y, const std::vector<int>& perm) {
  return MultiY(permute_channels(y.data(), y.M(), y.d(), perm), y.M(), y.d());
}

Vec permute_channels(const Vec& data, int M, int d, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != M) throw DimensionError("permute_channels: permutation has the wrong size");
  Vec out(data.size());
  for (int m = 0; m < M; ++m) out.segment(static_cast<Eigen::Index>(m) * d, d) = data.segment(static_cast<Eigen::Index>(perm[m]) * d, d);
  return out;
}

DiagnosticReport perm_check(const ScoreSource& src, const NoiseModel& noise, const std::vector<MultiY>& points,
                            long n_perms, Rng& rng, double threshold) {
  if (!noise.is_homogeneous()) throw std::invalid_argument("perm_check: noise model is not homogeneous");
  const int M = noise.M();
  std::vector<std::vector<int>> perms;
  long factorial = 1;
  for (int i = 2; i <= M && factorial <= 1'000'000; ++i) factorial *= i;
  std::vector<int> base(static_cast<std::size_t>(M));
  std::iota(base.begin(), base.end(), 0);
  if (n_perms == 0 || n_perms >= factorial) {
    std::vector<int> p = base;
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
  } else {
    for (long i = 0; i < n_perms; ++i) {
      std::vector<int> p = base;
      std::shuffle(p.begin(), p.end(), rng.engine());
      perms.push_back(std::move(p));
    }
  }

  double worst_logp = 0.0;
  double worst_score = 0.0;
  for (const MultiY& y : points) {
    require_conforms(y, noise);
    const Vec s = src.score(y);
    const double lp = src.has_log_density() ? (*src.log_density)(y) : 0.0;
    for (const auto& p : perms) {
      const MultiY yp = permute_channels(y, p);
      const Vec sp = src.score(yp);
      worst_score = std::max(worst_score, (sp - permute_channels(s, M, noise.d(), p)).cwiseAbs().maxCoeff());
      if (src.has_log_density()) worst_logp = std::max(worst_logp, std::abs((*src.log_density)(yp) - lp));
    }
  }
  DiagnosticReport report{"perm_check", {}, {}};
  if (src.has_log_density()) report.checks.push_back(Check::at_most("max_abs_logp_gap", worst_logp, threshold));
  report.checks.push_back(Check::at_most("max_score_equivariance_gap", worst_score, threshold));
  report.details = std::to_string(points.size()) + " points x " + std::to_string(perms.size()) + " permutations";
  return report;
}

DiagnosticReport chain_moment_test(const Eigen::MatrixXd& samples, const Vec& target_mean, const Vec& target_var,
                                   double z_threshold, double var_tol) {
  if (samples.rows() < 1000) throw std::invalid_argument("chain_moment_test: need at least 1000 samples");
  if (samples.cols() != target_mean.size() || samples.cols() != target_var.size())
    throw DimensionError("chain_moment_test: target shapes do not match the samples");
  double worst_z = 0.0;
  double worst_ratio_gap = 0.0;
  double min_ess = std::numeric_limits<double>::infinity();
  double sum_abs_z = 0.0;
  std::vector<double> column(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) column[static_cast<std::size_t>(i)] = samples(i, j);
    const AutocorrEss ac = autocorr_ess(column);
    if (ac.degenerate) throw std::invalid_argument("chain_moment_test: degenerate (constant) samples");
    const double mu = mean(column);
    const double var = variance(column);
    const double z = (mu - target_mean[j]) / std::sqrt(var / ac.ess);
    worst_z = std::max(worst_z, std::abs(z));
    sum_abs_z += std::abs(z);
    worst_ratio_gap = std::max(worst_ratio_gap, std::abs(var / target_var[j] - 1.0));
    min_ess = std::min(min_ess, ac.ess);
  }
  DiagnosticReport report{"chain_moment_test",
                          {Check::at_most("max_abs_mean_z", worst_z, z_threshold),
                           Check::at_most("max_var_ratio_gap", worst_ratio_gap, var_tol)},
                          {}};
  std::ostringstream details;
  details.precision(6);
  details << samples.rows() << " draws x " << samples.cols() << " coords, min ESS " << min_ess
          << ", mean |z| " << sum_abs_z / static_cast<double>(samples.cols());
  report.details = details.str();
  return report;
}

}  // namespace mdensity
