#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mdensity/noise.hpp"
#include "mdensity/rng.hpp"
#include "mdensity/stats.hpp"

namespace mdensity {

/// One measured quantity against its threshold.
struct Check {
  enum class Kind { at_most, at_least, within };  // within: lo <= value <= hi

  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  double upper = 0.0;  // only for Kind::within
  Kind kind = Kind::at_most;

  bool passed() const;
  static Check at_most(std::string name, double value, double threshold);
  static Check at_least(std::string name, double value, double threshold);
  static Check within(std::string name, double value, double lo, double hi);
};

/// Named result of one diagnostic. Pass/fail is derived from the checks only.
struct DiagnosticReport {
  std::string name;
  std::vector<Check> checks;
  std::string details;

  bool passed() const;
};

/// CSV header and rows: name,check,value,threshold,upper,kind,passed,details.
void write_report_csv_header(std::ostream& out);
void write_report_csv(std::ostream& out, const DiagnosticReport& report);
void write_report_text(std::ostream& out, const DiagnosticReport& report);

/// Central-difference gradient of f at y.
Vec fd_gradient(const std::function<double(const MultiY&)>& f, const MultiY& y, double h);

/// Score source backed by an energy f: score = -grad f by central differences,
/// log density = -f.
ScoreSource score_from_energy(std::function<double(const MultiY&)> energy, double h = 1e-5);

/// Max relative error (denominator max(|score|, 1e-8)) between the score and
/// central differences of the log density.
DiagnosticReport fd_score_check(const ScoreSource& src, const std::vector<MultiY>& points, double h = 1e-5,
                                double threshold = 1e-5);

/// Norms |x - plugin(y)| for x = 0 and y ~ p(y | x).
std::vector<double> plugin_error_norms(const NoiseModel& noise, long trials, Rng& rng);

/// Mean of |x - plugin(y)| against the chi mean (d < 100) or sigma_eff * sqrt(d).
DiagnosticReport concentration_report(const NoiseModel& noise, long trials, Rng& rng, double rel_tol = 0.01);

/// Two-sample KS between the plug-in error norms of two models.
DiagnosticReport congruence_report(const NoiseModel& a, const NoiseModel& b, long trials, Rng& rng,
                                   double min_p_value = 0.01);

/// Permutation invariance of log p and equivariance of the score for a
/// homogeneous model. n_perms == 0 or >= M! enumerates every permutation.
DiagnosticReport perm_check(const ScoreSource& src, const NoiseModel& noise, const std::vector<MultiY>& points,
                            long n_perms, Rng& rng, double threshold = 1e-10);

/// Per-coordinate mean z-scores (ESS-deflated standard errors) and variance
/// ratios of `samples` (rows are draws) against a known target.
DiagnosticReport chain_moment_test(const Eigen::MatrixXd& samples, const Vec& target_mean, const Vec& target_var,
                                   double z_threshold = 3.0, double var_tol = 0.05);

/// Apply a channel permutation (perm[m] = source channel of output channel m).
MultiY permute_channels(const MultiY& y, const std::vector<int>& perm);
Vec permute_channels(const Vec& data, int M, int d, const std::vector<int>& perm);

}  // namespace mdensity
