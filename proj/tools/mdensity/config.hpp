#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdensity/mlp.hpp"
#include "mdensity/noise.hpp"
#include "mdensity/samplers.hpp"
#include "mdensity/train.hpp"

namespace mdensity::cli {

/// Raised for anything wrong with the resolved configuration (exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { demo_figure1, sample, train, validate, concentration };

Command parse_command(const std::string& name);
std::string to_string(Command command);

struct PriorSpec {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<double> stds;
  GaussianMixturePrior build() const;
};

struct NoiseSpec {
  std::vector<double> sigmas;
  std::string text;  // as written: "1x16" or a list
};

struct DatasetSpec {
  std::string kind = "gaussian_mixture";  // or "two_rings"
  double r_inner = 1.0;
  double r_outer = 2.0;
  double width = 0.1;
};

struct GridSpec {
  double lo = -7.0;
  double hi = 7.0;
  int n = 281;
  int arrows = 25;
};

struct SampleSpec {
  SamplerParams params{0.5, 0.5, 1.0, 100000};
  long jump_every = 1;
  Integrator integrator = Integrator::sachs;
  InitScheme init = InitScheme::uniform;
  std::optional<std::filesystem::path> net;
  bool trace_svg = true;
};

struct TrainSpec {
  DatasetSpec dataset;
  std::vector<int> widths;  // empty: default M*d-64-64-M*d
  TrainOptions options{};
  std::optional<std::filesystem::path> resume;
  long eval_samples = 20000;
};

struct ValidateSpec {
  bool corrupt_score = false;
  long sampler_steps = 200000;
  long concentration_trials = 10000;
};

struct ConcentrationSpec {
  int d = 1000;
  long trials = 10000;
  std::optional<NoiseSpec> congruent;
};

/// Fully resolved run configuration. Precedence: built-in defaults, then the
/// JSON document, then command-line flags.
struct RunConfig {
  Command command = Command::validate;
  std::uint64_t seed = 0;
  std::filesystem::path out = "mdensity-out";
  std::optional<PriorSpec> prior;
  std::optional<NoiseSpec> noise;
  GridSpec grid;
  SampleSpec sample;
  TrainSpec train;
  ValidateSpec validate;
  ConcentrationSpec concentration;
};

/// Parse "<sigma>x<M>" (e.g. "1x16") or a JSON list of sigmas.
NoiseSpec parse_noise(const nlohmann::json& j);

RunConfig config_from_json(Command command, const nlohmann::json& j);
RunConfig load_config(Command command, const std::optional<std::filesystem::path>& path);

/// Checks every value the command needs; throws ConfigError.
void validate_config(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

/// Noise model of the run with data dimension d.
NoiseModel noise_model(const RunConfig& config, int d);

}  // namespace mdensity::cli
