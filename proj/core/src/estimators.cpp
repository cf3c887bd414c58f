#include "mdensity/estimators.hpp"

#include <algorithm>
#include <stdexcept>

#include "mdensity/errors.hpp"

namespace mdensity {

Vec bayes_estimate_channel(const Vec& score, const NoiseModel& noise, const MultiY& y, int m) {
  require_conforms(y, noise);
  if (score.size() != noise.dim()) throw DimensionError("bayes_estimate_channel: score has the wrong length");
  if (m < 0 || m >= noise.M()) throw std::out_of_range("bayes_estimate_channel: channel out of range");
  const double var = noise.sigma(m) * noise.sigma(m);
  return y.channel(m) + var * score.segment(static_cast<Eigen::Index>(m) * noise.d(), noise.d());
}

Vec bayes_estimate_channel(const ScoreSource& src, const NoiseModel& noise, const MultiY& y, int m) {
  if (m < 0 || m >= noise.M()) throw std::out_of_range("bayes_estimate_channel: channel out of range");
  return bayes_estimate_channel(src.score(y), noise, y, m);
}

EstimateReport bayes_estimate_mean(const Vec& score, const NoiseModel& noise, const MultiY& y) {
  EstimateReport report;
  report.per_channel.reserve(static_cast<std::size_t>(noise.M()));
  report.estimate = Vec::Zero(noise.d());
  for (int m = 0; m < noise.M(); ++m) {
    report.per_channel.push_back(bayes_estimate_channel(score, noise, y, m));
    report.estimate += report.per_channel.back();
  }
  report.estimate /= noise.M();
  for (std::size_t a = 0; a < report.per_channel.size(); ++a)
    for (std::size_t b = a + 1; b < report.per_channel.size(); ++b)
      report.consistency_gap =
          std::max(report.consistency_gap, (report.per_channel[a] - report.per_channel[b]).norm());
  return report;
}

EstimateReport bayes_estimate_mean(const ScoreSource& src, const NoiseModel& noise, const MultiY& y) {
  require_conforms(y, noise);
  return bayes_estimate_mean(src.score(y), noise, y);
}

Vec plugin_estimate(const NoiseModel& noise, const MultiY& y) {
  require_conforms(y, noise);
  Vec acc = Vec::Zero(noise.d());
  for (int m = 0; m < noise.M(); ++m) acc += y.channel(m);
  return acc / noise.M();
}

}  // namespace mdensity
