#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "heatbath/critical_points.hpp"
#include "heatbath/dynamics.hpp"

namespace heatbath {

/// Fraction of windowed spectral power at |lambda| > band.
///
/// The series is Hann-windowed; the numerator is the power of the windowed, mean-removed series
/// above the band and the denominator the total windowed power (Parseval). A constant series
/// gives 0 and a pure tone well above the band gives ~1. Needs at least 16 samples.
double spectral_diagnostic(std::span<const double> series, double sample_dt, double band);

struct ReportOptions {
  double tail_fraction = 0.25;
  double band_fraction = 0.1;  // band = band_fraction * slowest linearised frequency at the approached point
};

struct ConvergenceReport {
  std::optional<std::size_t> approached_point;
  std::vector<double> approached_q;
  double dist_final = 0.0;
  double tail_start = 0.0;
  double tail_end = 0.0;
  double tail_sup_p = 0.0;
  double tail_sup_qddot = 0.0;   // finite-difference second derivative
  double tail_sup_qdddot = 0.0;  // finite-difference third derivative
  std::vector<double> theta_tail;        // per thermostat
  std::vector<double> bath_power_tail;   // per thermostat, sup |dE_m/dt|
  std::vector<double> bath_energy_final; // per thermostat
  double slowest_frequency = 0.0;
  double band = 0.0;
  double spectral_ratio = 0.0;   // max over coupled vertices
  double energy_initial = 0.0;
  double energy_sum_limit = 0.0; // E(0) - V_eff(q_c) + sum K q_c^2 / 2
  double energy_sum_defect = 0.0;
  double energy_drift = 0.0;
  bool monotone_tail = false;    // informational
};

/// Throws GuardViolation if the trajectory runs past half the recurrence time, std::invalid_argument
/// for an empty critical set or too short a trajectory.
ConvergenceReport convergence_report(const CoupledSystem& sys, const Trajectory& traj, const CriticalSet& critical,
                                     const ReportOptions& options = {});

/// zeta = (xi1 + xi2)/sqrt 2, eta = (xi1 - xi2)/sqrt 2, same for velocities.
struct TwoBathModes {
  BathState zeta;
  BathState eta;
};

TwoBathModes two_bath_transform(const BathState& first, const BathState& second);
/// Requires one oscillator, exactly two thermostats with identical couplings (they share the grid).
TwoBathModes two_bath_transform(const CoupledSystem& sys, const FullState& state);
std::pair<BathState, BathState> inverse_two_bath_transform(const TwoBathModes& modes);

/// Re <zeta, eta> with the bold variables xidot + i nu xi; equals E_1 - E_2.
double bath_overlap(const BathState& a, const BathState& b, const SpectralGrid& grid);

struct TwoBathReport {
  double truncation_time = 0.0;
  double e1_initial = 0.0;
  double e2_initial = 0.0;
  double e1_final = 0.0;
  double e2_final = 0.0;
  double energy_sum_limit = 0.0;      // E(0) - V_eff(q_c) + sum K q_c^2/2, when a critical set is given
  double energy_sum_defect = 0.0;
  double defect = 0.0;                // D = Re <eta0, zeta0 + sqrt2 kappa q_hat>
  double observed_difference = 0.0;   // E_1(T) - E_2(T)
  double agreement_error = 0.0;       // |observed - D|
  double eta_energy_initial = 0.0;
  bool indeterminate = false;         // D within quadrature noise of zero
};

TwoBathReport equilibrium_defect(const CoupledSystem& sys, const FullState& init, const Trajectory& traj,
                                 double truncation, const CriticalSet* critical = nullptr);

}  // namespace heatbath
