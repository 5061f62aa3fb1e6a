#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace heatbath {

/// Coupling profile kappa(nu) of one thermostat. Both families vanish only at nu = 0.
///
///   gauss:    kappa(nu) = a * nu * exp(-nu^2 / (2 sigma^2))
///   rational: kappa(nu) = a * nu / (1 + nu^2)^p,  p >= 2
struct CouplingSpec {
  enum class Family { gauss, rational };

  Family family = Family::gauss;
  double amplitude = 1.0;
  double sigma = 1.0;
  int power = 2;

  static CouplingSpec gauss(double amplitude, double sigma);
  static CouplingSpec rational(double amplitude, int power);

  void validate() const;

  double operator()(double nu) const;
  /// kappa(nu) / nu, regular at the origin.
  double over_nu(double nu) const;

  bool operator==(const CouplingSpec&) const = default;
  std::string describe() const;
};

/// Uniform midpoint discretisation of the frequency line [-nu_max, nu_max].
struct SpectralGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double nu_max = 0.0;
  double spacing = 0.0;

  std::size_t size() const { return nodes.size(); }
  bool operator==(const SpectralGrid&) const = default;
};

SpectralGrid build_grid(double nu_max, int count);

/// 2 pi / (node spacing). Runs must stay below half of this.
double recurrence_horizon(const SpectralGrid& grid);

/// Default truncation: 8 sigma for gauss, tail of the K integral below 1e-10 for rational.
double default_cutoff(const CouplingSpec& coupling);

/// K = int kappa^2 / nu^2 dnu over the real line, by adaptive quadrature on the
/// analytic profile. Throws std::runtime_error if the error estimate exceeds `tolerance`.
double compute_K(const CouplingSpec& coupling, double tolerance = 1e-12);

/// Discrete counterpart of compute_K on a simulation grid.
double grid_K(const CouplingSpec& coupling, const SpectralGrid& grid);

/// Mode amplitudes xi(nu_k) and velocities xi'(nu_k).
struct BathState {
  std::vector<double> xi;
  std::vector<double> xidot;

  static BathState zero(std::size_t modes) { return {std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0)}; }
  bool operator==(const BathState&) const = default;
};

struct BathInitSpec {
  enum class Profile { zero, gauss_packet, dressed };

  Profile profile = Profile::zero;
  double b = 0.0;      // gauss_packet: xi_0 = b nu exp(-nu^2/(2 s^2))
  double c = 0.0;      // gauss_packet: xidot_0 = c exp(-nu^2/(2 s^2))
  double s = 1.0;
  double q_ref = 0.0;  // dressed: xi_0 = kappa q_ref / nu^2

  static BathInitSpec zero() { return {}; }
  static BathInitSpec gauss_packet(double b, double c, double s);
  static BathInitSpec dressed(double q_ref);

  void validate() const;
  std::string describe() const;
};

/// 1/2 sum_k w_k (xidot_k^2 + nu_k^2 xi_k^2)
double bath_energy(const BathState& state, const SpectralGrid& grid);

/// phi = sum_k w_k kappa(nu_k) xi_k
double coupling_force(const BathState& state, const CouplingSpec& coupling, const SpectralGrid& grid);
double coupling_force(const BathState& state, std::span<const double> weighted_kappa);

BathState init_bath(const BathInitSpec& spec, const CouplingSpec& coupling, const SpectralGrid& grid);

/// Columns nu, xi, xidot; 17 significant digits.
void write_bath_csv(std::ostream& out, const BathState& state, const SpectralGrid& grid);

}  // namespace heatbath
