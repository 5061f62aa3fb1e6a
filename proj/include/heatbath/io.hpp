#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "heatbath/analysis.hpp"
#include "heatbath/critical_points.hpp"
#include "heatbath/dynamics.hpp"
#include "heatbath/network.hpp"

namespace heatbath {

/// Header t, q_<id>.., p_<id>.., E, E_1..E_M, phi_1..phi_M; 17 significant digits, '\n' endings.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Inverse of write_trajectory_csv. sample_dt is taken from the first time step and
/// recurrence_horizon is left at zero; callers that know the run configuration overwrite both.
/// Throws std::runtime_error on a malformed table.
Trajectory read_trajectory_csv(std::istream& in);

nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const AssumptionReport& report, const NetworkSpec& net);
nlohmann::json to_json(const TwoBathReport& report);
nlohmann::json to_json(const CriticalSet& set);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace heatbath
