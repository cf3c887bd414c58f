#pragma once

#include <vector>

#include "mdensity/noise.hpp"

namespace mdensity {

/// Per-channel Bayes estimates and their channel mean.
struct EstimateReport {
  Vec estimate;                 // mean of per_channel
  std::vector<Vec> per_channel; // y_m + sigma_m^2 * score_m(y)
  double consistency_gap = 0.0; // max_{m,m'} |per_channel[m] - per_channel[m']|_2
};

/// y_m + sigma_m^2 * (score(y))_m.
Vec bayes_estimate_channel(const ScoreSource& src, const NoiseModel& noise, const MultiY& y, int m);

/// Same, reusing an already evaluated score.
Vec bayes_estimate_channel(const Vec& score, const NoiseModel& noise, const MultiY& y, int m);

EstimateReport bayes_estimate_mean(const ScoreSource& src, const NoiseModel& noise, const MultiY& y);
EstimateReport bayes_estimate_mean(const Vec& score, const NoiseModel& noise, const MultiY& y);

/// Channel average (1/M) sum_m y_m.
Vec plugin_estimate(const NoiseModel& noise, const MultiY& y);

}  // namespace mdensity
