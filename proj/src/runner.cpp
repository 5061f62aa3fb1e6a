#include "heatbath/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "heatbath/errors.hpp"
#include "heatbath/io.hpp"
#include "heatbath/kernel.hpp"

namespace heatbath {

namespace fs = std::filesystem;

namespace {

constexpr const char* kTrajectory = "trajectory.csv";
constexpr const char* kTrajectoryGle = "trajectory_gle.csv";

/// Collects artifacts so that a failed run can take them back.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir_ / name).string()));
    files_.push_back(name);
  }

  void rollback(const std::string& message) noexcept {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(dir_ / f, ec);
    std::ofstream marker(dir_ / "FAILED", std::ios::binary | std::ios::trunc);
    marker << message << '\n';
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Trajectory load_trajectory(const fs::path& path, const CoupledSystem& sys, const Scenario& scenario) {
  std::ifstream in(path, std::ios::binary);
  Trajectory traj = read_trajectory_csv(in);
  if (traj.vertex_ids != sys.network().vertex_ids || traj.baths() != sys.baths())
    throw ConfigError(fmt::format("{} does not match scenario '{}'", path.filename().string(), scenario.name));
  for (std::size_t m = 0; m < sys.baths(); ++m) traj.bath_vertices.push_back(sys.bath_vertex(m));
  traj.sample_dt = scenario.integrator.sample_dt();
  traj.recurrence_horizon = recurrence_horizon(sys.grid());
  return traj;
}

bool identical_couplings(const NetworkSpec& net) {
  return net.baths.size() == 2 && net.baths[0].coupling == net.baths[1].coupling;
}

nlohmann::json analyse(const Scenario& scenario, const CoupledSystem& sys, const FullState& init,
                       const CriticalSet& critical, const Trajectory& traj) {
  nlohmann::json j;
  j["energy_drift"] = relative_energy_drift(traj);
  j["samples"] = traj.samples();
  try {
    j["convergence"] = to_json(convergence_report(sys, traj, critical, scenario.report));
  } catch (const std::invalid_argument& e) {
    j["convergence"] = nullptr;
    j["convergence_error"] = e.what();
  }
  if (scenario.two_bath() && identical_couplings(sys.network())) {
    j["two_bath"] = to_json(equilibrium_defect(sys, init, traj, scenario.truncation, critical.empty() ? nullptr : &critical));
  }
  return j;
}

nlohmann::json oracle_diff(const Trajectory& direct, const Trajectory& gle) {
  const std::size_t n = std::min(direct.samples(), gle.samples());
  std::vector<double> dq(direct.vertices(), 0.0);
  std::vector<double> de(direct.baths(), 0.0);
  double dp = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < dq.size(); ++j) {
      dq[j] = std::max(dq[j], std::abs(direct.q[s][j] - gle.q[s][j]));
      dp = std::max(dp, std::abs(direct.p[s][j] - gle.p[s][j]));
    }
    for (std::size_t m = 0; m < de.size(); ++m)
      de[m] = std::max(de[m], std::abs(direct.bath_energy[s][m] - gle.bath_energy[s][m]));
  }
  nlohmann::json per_vertex = nlohmann::json::object();
  for (std::size_t j = 0; j < dq.size(); ++j) per_vertex[std::to_string(direct.vertex_ids[j])] = dq[j];
  double worst = 0.0;
  for (double x : dq) worst = std::max(worst, x);
  return {{"horizon", n ? direct.times[n - 1] : 0.0},
          {"samples", n},
          {"sup_abs_dq", worst},
          {"sup_abs_dq_per_vertex", per_vertex},
          {"sup_abs_dp", dp},
          {"sup_abs_dE_bath", de}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

RunMode parse_run_mode(std::string_view name) {
  if (name == "direct") return RunMode::direct;
  if (name == "gle") return RunMode::gle;
  if (name == "both") return RunMode::both;
  if (name == "analyze-only") return RunMode::analyze_only;
  throw ConfigError(fmt::format("unknown mode '{}' (direct, gle, both, analyze-only)", name));
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::direct: return "direct";
    case RunMode::gle: return "gle";
    case RunMode::both: return "both";
    case RunMode::analyze_only: return "analyze-only";
  }
  return "?";
}

fs::path resolve_output_directory(const Scenario& scenario, const std::optional<fs::path>& override_dir) {
  if (override_dir) return *override_dir;
  if (scenario.output_directory.is_absolute()) return scenario.output_directory;
  if (const char* root = std::getenv("HEATBATH_OUTPUT_ROOT"); root && *root) return fs::path(root) / scenario.output_directory;
  return scenario.output_directory;
}

RunOutcome run_scenario(const Scenario& scenario, RunMode mode, const fs::path& directory, std::ostream* log,
                        int verbosity) {
  auto say = [&](int level, const std::string& msg) {
    if (log && verbosity >= level) *log << msg << '\n';
  };
  fs::create_directories(directory);
  std::error_code ec;
  fs::remove(directory / "FAILED", ec);

  RunOutcome outcome;
  outcome.directory = directory;
  outcome.warnings = scenario.warnings;
  for (const auto& w : outcome.warnings) say(0, "warning: " + w);

  ArtifactWriter writer(directory);
  try {
    const CoupledSystem sys(scenario.network, scenario.grid());
    const FullState init = scenario.initial_state(sys);
    say(2, fmt::format("{}: {} vertices, {} thermostats, {} modes each", scenario.name, sys.vertices(), sys.baths(),
                       sys.modes()));

    const AssumptionReport assumptions = validate_assumptions(sys.network(), sys.K(), scenario.assumption_options());
    const CriticalSet critical = find_critical_points(sys.network(), sys.K(), scenario.critical);
    say(1, fmt::format("critical points: {} ({} failed starts)", critical.size(), critical.failed_starts));

    std::optional<Trajectory> direct;
    std::optional<Trajectory> gle;
    if (mode == RunMode::direct || mode == RunMode::both) {
      say(1, fmt::format("direct integration to T = {:g}", scenario.integrator.horizon));
      FullState final_state;
      direct = simulate(sys, init, scenario.integrator, final_state);
      std::ostringstream csv;
      write_trajectory_csv(csv, *direct);
      writer.write(kTrajectory, csv.str());
      for (std::size_t m = 0; m < sys.baths(); ++m) {
        std::ostringstream bath;
        write_bath_csv(bath, final_state.baths[m], sys.grid());
        writer.write(fmt::format("bath_final_{}.csv", m + 1), bath.str());
      }
    }
    if (mode == RunMode::gle || mode == RunMode::both) {
      const double dt = scenario.integrator.dt;
      const double tau_max = dt * std::ceil(scenario.tau_max / dt - 1e-9);
      std::vector<MemoryKernel> kernels;
      for (std::size_t m = 0; m < sys.baths(); ++m) {
        kernels.push_back(build_kernel(sys.network().baths[m].coupling, dt, tau_max));
        std::ostringstream csv;
        write_kernel_csv(csv, kernels.back());
        writer.write(fmt::format("kernel_{}.csv", m + 1), csv.str());
      }
      say(1, fmt::format("memory-kernel integration to T = {:g}", scenario.integrator.horizon));
      gle = integrate_gle(sys, init, kernels, scenario.integrator);
      std::ostringstream csv;
      write_trajectory_csv(csv, *gle);
      writer.write(kTrajectoryGle, csv.str());
    }
    if (mode == RunMode::analyze_only) {
      if (fs::exists(directory / kTrajectory)) direct = load_trajectory(directory / kTrajectory, sys, scenario);
      if (fs::exists(directory / kTrajectoryGle)) gle = load_trajectory(directory / kTrajectoryGle, sys, scenario);
      if (!direct && !gle) throw ConfigError(fmt::format("no trajectory CSV in {}", directory.string()));
    }

    // The report depends only on the scenario and the trajectories as stored, so analyze-only
    // reproduces it exactly.
    nlohmann::json report;
    report["scenario"] = scenario.name;
    report["config_hash"] = fnv1a_hex(scenario.source);
    report["K"] = std::vector<double>(sys.K().begin(), sys.K().end());
    report["recurrence_horizon"] = recurrence_horizon(sys.grid());
    report["assumptions"] = to_json(assumptions, sys.network());
    report["critical_set"] = to_json(critical);
    if (direct) report["direct"] = analyse(scenario, sys, init, critical, *direct);
    if (gle) report["gle"] = analyse(scenario, sys, init, critical, *gle);
    writer.write("report.json", dump(report));

    std::ostringstream cp;
    write_critical_csv(cp, critical);
    writer.write("critical_points.csv", cp.str());

    if (mode == RunMode::both) writer.write("oracle_diff.json", dump(oracle_diff(*direct, *gle)));

    nlohmann::json manifest;
    manifest["scenario"] = scenario.name;
    manifest["mode"] = to_string(mode);
    manifest["config_hash"] = fnv1a_hex(scenario.source);
    manifest["timestamp"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::now()));
    nlohmann::json files = nlohmann::json::array();
    std::vector<std::string> listed;
    if (mode == RunMode::analyze_only) {
      for (const char* input : {kTrajectory, kTrajectoryGle})
        if (fs::exists(directory / input)) listed.push_back(input);
    }
    listed.insert(listed.end(), writer.files().begin(), writer.files().end());
    for (const auto& name : listed) {
      const std::string bytes = read_file(directory / name);
      files.push_back({{"name", name}, {"bytes", bytes.size()}, {"fnv1a", fnv1a_hex(bytes)}});
    }
    manifest["files"] = files;
    writer.write("manifest.json", dump(manifest));
  } catch (const std::exception& e) {
    writer.rollback(e.what());
    throw;
  }
  outcome.files = writer.files();
  say(1, fmt::format("wrote {} files to {}", outcome.files.size(), directory.string()));
  return outcome;
}

}  // namespace heatbath
