#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mdensity/commands.hpp"
#include "mdensity/errors.hpp"

int main(int argc, char** argv) {
  using namespace mdensity::cli;
  CLI::App app{"mdensity: multimeasurement densities, walk-jump sampling and toy MDAE training"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("command", command, "demo-figure1 | sample | train | validate | concentration")
      ->required()
      ->check(CLI::IsMember({"demo-figure1", "sample", "train", "validate", "concentration"}));
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "overrides config seed");
  app.add_option("--out", out, "overrides config output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    RunConfig config = load_config(parse_command(command),
                                   config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));
    if (seed) config.seed = *seed;
    if (out) config.out = *out;
    return run(config, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mdensity::DivergenceError& e) {
    std::cerr << "diverged at step " << e.step() << ": " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiagnostic;
  }
}
