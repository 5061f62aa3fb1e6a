// heatbath: run a scenario file or bundled preset and write CSV/JSON artifacts.
//
// Exit codes: 0 success, 2 configuration or guard error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heatbath/errors.hpp"
#include "heatbath/runner.hpp"
#include "heatbath/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

fs::path preset_path(const std::string& name) {
  if (const char* dir = std::getenv("HEATBATH_PRESET_DIR"); dir && *dir) return fs::path(dir) / (name + ".yaml");
  return fs::path(HEATBATH_PRESET_DIR) / (name + ".yaml");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oscillator networks coupled to Lagrangian thermostats"};
  std::string scenario_file;
  std::string preset;
  std::string mode_name = "direct";
  std::string out_dir;
  int verbosity = 1;
  bool quiet = false;
  bool list_presets = false;

  auto* file_opt = app.add_option("scenario", scenario_file, "Scenario YAML file");
  auto* preset_opt = app.add_option("--preset", preset, "Bundled preset name (e.g. chain3)");
  file_opt->excludes(preset_opt);
  app.add_option("--mode", mode_name, "direct | gle | both | analyze-only")
      ->check(CLI::IsMember({"direct", "gle", "both", "analyze-only"}));
  app.add_option("-o,--out", out_dir, "Output directory (overrides the scenario and HEATBATH_OUTPUT_ROOT)");
  app.add_flag("-v,--verbose", [&](std::int64_t n) { verbosity += static_cast<int>(n); }, "More progress output");
  app.add_flag("-q,--quiet", quiet, "Only warnings and errors");
  app.add_flag("--list-presets", list_presets, "List bundled presets and exit");
  CLI11_PARSE(app, argc, argv);
  if (quiet) verbosity = 0;

  if (list_presets) {
    const fs::path dir = preset_path("x").parent_path();
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".yaml") std::cout << entry.path().stem().string() << '\n';
    return 0;
  }
  if (scenario_file.empty() && preset.empty()) {
    std::cerr << "error: give a scenario file or --preset\n";
    return kConfigError;
  }

  try {
    const fs::path path = preset.empty() ? fs::path(scenario_file) : preset_path(preset);
    const heatbath::Scenario scenario = heatbath::parse_scenario(path);
    const heatbath::RunMode mode = heatbath::parse_run_mode(mode_name);
    std::optional<fs::path> override_dir;
    if (!out_dir.empty()) override_dir = out_dir;
    const fs::path dir = heatbath::resolve_output_directory(scenario, override_dir);
    heatbath::run_scenario(scenario, mode, dir, &std::cerr, verbosity);
  } catch (const heatbath::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const heatbath::GuardViolation& e) {
    std::cerr << "guard violation: " << e.what() << '\n';
    return kConfigError;
  } catch (const heatbath::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return 0;
}
