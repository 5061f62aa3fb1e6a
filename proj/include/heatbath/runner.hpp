#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatbath/scenario.hpp"

namespace heatbath {

enum class RunMode { direct, gle, both, analyze_only };

RunMode parse_run_mode(std::string_view name);
std::string to_string(RunMode mode);

struct RunOutcome {
  std::filesystem::path directory;
  std::vector<std::string> files;  // written by this run, in manifest order
  std::vector<std::string> warnings;
};

/// `override_dir` wins; otherwise a relative scenario directory is placed under
/// $HEATBATH_OUTPUT_ROOT when set, else under the working directory.
std::filesystem::path resolve_output_directory(const Scenario& scenario,
                                               const std::optional<std::filesystem::path>& override_dir);

/// Runs the scenario and writes its artifacts into `directory`.
///
/// direct: trajectory.csv, bath_final_<m>.csv
/// gle:    trajectory_gle.csv, kernel_<m>.csv
/// both:   all of the above plus oracle_diff.json
/// analyze-only: reads the existing trajectory CSVs
/// Every mode writes report.json, critical_points.csv and manifest.json. On an exception the
/// files written so far are removed, a FAILED marker with the message is left behind, and the
/// exception propagates.
RunOutcome run_scenario(const Scenario& scenario, RunMode mode, const std::filesystem::path& directory,
                        std::ostream* log = nullptr, int verbosity = 1);

}  // namespace heatbath
