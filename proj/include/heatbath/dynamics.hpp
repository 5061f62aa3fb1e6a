#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "heatbath/network.hpp"
#include "heatbath/thermostat.hpp"

namespace heatbath {

/// Network plus one spectral grid shared by every thermostat, with the per-mode tables the
/// integrators need.
class CoupledSystem {
 public:
  CoupledSystem(NetworkSpec net, SpectralGrid grid, double k_tolerance = 1e-12);

  const NetworkSpec& network() const { return net_; }
  const SpectralGrid& grid() const { return grid_; }
  std::size_t vertices() const { return net_.size(); }
  std::size_t baths() const { return net_.baths.size(); }
  std::size_t modes() const { return grid_.size(); }

  /// Continuum K_m from the analytic profile.
  std::span<const double> K() const { return K_; }
  /// Grid quadrature of the same integral; used inside the integrator.
  std::span<const double> K_grid() const { return K_grid_; }
  /// w_k kappa(nu_k)
  std::span<const double> weighted_kappa(std::size_t m) const { return weighted_kappa_[m]; }
  /// kappa(nu_k) / nu_k^2, the dressed-profile factor.
  std::span<const double> dressed_factor(std::size_t m) const { return dressed_factor_[m]; }
  std::size_t bath_vertex(std::size_t m) const { return net_.baths[m].vertex; }

  double phi(std::size_t m, const BathState& bath) const { return coupling_force(bath, weighted_kappa(m)); }

 private:
  NetworkSpec net_;
  SpectralGrid grid_;
  std::vector<double> K_;
  std::vector<double> K_grid_;
  std::vector<std::vector<double>> weighted_kappa_;
  std::vector<std::vector<double>> dressed_factor_;
};

struct FullState {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<BathState> baths;
  double t = 0.0;

  bool finite() const;
  bool operator==(const FullState&) const = default;
};

/// Initial state with the given bath profiles (one per thermostat).
FullState make_state(const CoupledSystem& sys, std::vector<double> q, std::vector<double> p,
                     const std::vector<BathInitSpec>& bath_init);

/// Negates p and every bath velocity; running forward from the result runs the original backward.
FullState time_reversed(FullState state);

struct Derivative {
  std::vector<double> dq;
  std::vector<double> dp;
  std::vector<BathState> dbaths;  // xi -> dxi, xidot -> dxidot
};

Derivative rhs(const CoupledSystem& sys, const FullState& state);

/// E = sum p^2/2 + sum U + sum V + sum_m E_m - sum_m q_m phi_m
double total_energy(const CoupledSystem& sys, const FullState& state);
/// sum p^2/2 + sum int xidot^2/2 + V_eff(q) + sum int nu^2/2 (xi - kappa q / nu^2)^2, with K_grid in V_eff.
double total_energy_completed_square(const CoupledSystem& sys, const FullState& state);

/// Symmetric splitting kick(h/2) drift(h/2) bath(h) drift(h/2) kick(h/2).
///
/// The kick uses -grad V_eff with the grid K. The bath sub-step is the exact flow of
/// sum_k w_k/2 (xidot_k^2 + nu_k^2 (xi_k - kappa_k q / nu_k^2)^2) with q frozen: every mode
/// rotates about its dressed centre and p picks up the time integral of phi - K q in closed form.
/// Each piece is an exact Hamiltonian flow, so the step is symplectic and time-reversible.
class StrangStepper {
 public:
  StrangStepper(const CoupledSystem& sys, double dt);
  void step(FullState& state) const;
  double dt() const { return dt_; }

 private:
  void kick(FullState& state, double h) const;
  void bath_flow(FullState& state) const;

  const CoupledSystem* sys_;
  double dt_;
  std::vector<double> cos_;
  std::vector<double> sin_over_nu_;
  std::vector<double> nu_sin_;
  std::vector<double> one_minus_cos_over_nu2_;
  mutable std::vector<double> force_;
};

/// Classical RK4 on the full system. Only stable for dt * nu_max < 2.
class Rk4Stepper {
 public:
  Rk4Stepper(const CoupledSystem& sys, double dt);
  void step(FullState& state) const;

 private:
  const CoupledSystem* sys_;
  double dt_;
};

FullState step_strang(const CoupledSystem& sys, FullState state, double dt);

struct IntegratorConfig {
  enum class Scheme { strang_exact_bath, rk4_reference };

  double dt = 1e-3;
  double horizon = 1.0;
  int sample_every = 1;
  Scheme scheme = Scheme::strang_exact_bath;
  double max_relative_drift = 1e-4;  // abort threshold, not the acceptance bound

  long steps() const;
  double sample_dt() const { return dt * sample_every; }
};

/// Throws GuardViolation when the horizon exceeds half the recurrence time, or the reference
/// scheme would be unstable; std::invalid_argument for malformed values.
void check_integrator_config(const IntegratorConfig& cfg, const SpectralGrid& grid, bool has_baths);

struct Trajectory {
  std::vector<int> vertex_ids;
  std::vector<std::size_t> bath_vertices;        // vertex index of each thermostat
  std::vector<double> times;
  std::vector<std::vector<double>> q;            // [sample][vertex]
  std::vector<std::vector<double>> p;            // [sample][vertex]
  std::vector<double> energy;                    // E(t)
  std::vector<std::vector<double>> bath_energy;  // [sample][thermostat]
  std::vector<std::vector<double>> phi;          // [sample][thermostat]
  double sample_dt = 0.0;
  double recurrence_horizon = 0.0;

  std::size_t samples() const { return times.size(); }
  std::size_t vertices() const { return vertex_ids.size(); }
  std::size_t baths() const { return bath_energy.empty() ? 0 : bath_energy.front().size(); }
  std::vector<double> coordinate(std::size_t vertex) const;
};

/// Deterministic; throws NumericalFailure on drift above cfg.max_relative_drift or a non-finite state.
Trajectory simulate(const CoupledSystem& sys, const FullState& init, const IntegratorConfig& cfg);

/// Same as simulate but also hands back the state at the horizon.
Trajectory simulate(const CoupledSystem& sys, const FullState& init, const IntegratorConfig& cfg, FullState& final_state);

/// Central differences of q at interior samples 2 .. n-3.
struct DerivativeSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> first;   // [sample][vertex]
  std::vector<std::vector<double>> second;
  std::vector<std::vector<double>> third;
};

DerivativeSeries derivative_series(const Trajectory& traj);

/// Largest relative energy deviation max_t |E(t) - E(0)| / max(1, |E(0)|).
double relative_energy_drift(const Trajectory& traj);

}  // namespace heatbath
