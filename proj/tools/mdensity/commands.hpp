#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdensity/config.hpp"

namespace mdensity::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostic = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitConfig = 3;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string status = "ok";
  std::vector<std::string> outputs;  // relative to the output directory
  nlohmann::json results = nlohmann::json::object();
};

RunOutcome cmd_demo_figure1(const RunConfig& config, std::ostream& log);
RunOutcome cmd_sample(const RunConfig& config, std::ostream& log);
RunOutcome cmd_train(const RunConfig& config, std::ostream& log);
RunOutcome cmd_validate(const RunConfig& config, std::ostream& log);
RunOutcome cmd_concentration(const RunConfig& config, std::ostream& log);

/// Validates the config, dispatches, and writes manifest.json. Returns the exit code.
int run(const RunConfig& config, std::ostream& log);

}  // namespace mdensity::cli
