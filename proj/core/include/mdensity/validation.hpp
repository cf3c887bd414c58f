#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdensity/diagnostics.hpp"

namespace mdensity {

struct ValidationOptions {
  std::uint64_t seed = 20211015;
  /// Negate channel 0 of the analytic score before the score-based checks.
  bool corrupt_score = false;
  long sampler_steps = 200'000;
  long concentration_trials = 10'000;
};

/// Names of the reports run_validation_suite produces, in order.
const std::vector<std::string>& validation_suite_manifest();

/// The full diagnostics battery; one report per manifest entry.
std::vector<DiagnosticReport> run_validation_suite(const ValidationOptions& options);

}  // namespace mdensity
