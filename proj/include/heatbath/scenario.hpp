#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatbath/analysis.hpp"
#include "heatbath/critical_points.hpp"
#include "heatbath/dynamics.hpp"
#include "heatbath/network.hpp"
#include "heatbath/thermostat.hpp"

namespace heatbath {

/// A fully validated run description. See README for the YAML schema.
struct Scenario {
  std::string name;
  NetworkSpec network;
  std::vector<BathInitSpec> bath_init;  // aligned with network.baths
  double nu_max = 0.0;
  int grid_count = 1024;
  std::vector<double> q0;
  std::vector<double> p0;
  bool backward = false;  // start from the momentum-reversed state
  IntegratorConfig integrator;
  double tau_max = 12.0;
  ReportOptions report;
  double truncation = 0.0;  // q_hat window for the two-bath defect; defaults to the horizon
  CriticalSearchOptions critical;
  std::optional<bool> expect_a5;
  std::filesystem::path output_directory;
  std::string source;  // raw config text, hashed into the manifest
  std::vector<std::string> warnings;

  SpectralGrid grid() const { return build_grid(nu_max, grid_count); }
  AssumptionOptions assumption_options() const;
  /// Initial state with the configured bath profiles, momentum-reversed when `backward`.
  FullState initial_state(const CoupledSystem& sys) const;
  /// True for a one-oscillator, two-thermostat study.
  bool two_bath() const { return network.size() == 1 && network.baths.size() == 2; }
};

/// Throws ConfigError with the offending line for syntax errors, unknown keys, and violated
/// invariants (including the recurrence guard). A failing A5 check is only a warning.
Scenario parse_scenario_text(std::string_view text);
Scenario parse_scenario(const std::filesystem::path& path);

}  // namespace heatbath
