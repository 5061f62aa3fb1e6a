#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "heatbath/dynamics.hpp"
#include "heatbath/thermostat.hpp"

namespace heatbath {

/// Memory kernel w(tau) = int kappa^2(nu) sin(nu tau) / nu dnu on a uniform lag grid tau_l = l * dtau.
///
/// The supported profiles have even kappa^2, so w is real and odd; only tau >= 0 is stored.
struct MemoryKernel {
  double dtau = 0.0;
  std::vector<double> w;
  double K = 0.0;
  double tail = 0.0;  // max |w| over the last percent of lags

  double tau_max() const { return w.empty() ? 0.0 : dtau * static_cast<double>(w.size() - 1); }
  /// Trapezoid integral of the tabulated kernel over [0, min(t, tau_max)].
  double integral(double t) const;
};

/// Throws std::invalid_argument if tau_max is not a multiple of dtau or the tail exceeds `tail_tolerance`.
MemoryKernel build_kernel(const CouplingSpec& coupling, double dtau, double tau_max, double tail_tolerance = 1e-10);

/// Columns tau, w.
void write_kernel_csv(std::ostream& out, const MemoryKernel& kernel);

struct ComplexEstimate {
  std::complex<double> value;
  double error = 0.0;
};

/// Fourier transform of the one-sided odd part of the kernel:
///   +-(w_hat(nu) - w_hat(-nu))/4 + (1/(2 pi i)) p.v. int lambda w_hat(lambda) / (nu^2 - lambda^2) dlambda
/// with w_hat(nu) = 2 pi kappa^2(nu) / (i nu). `sign` is +1 or -1.
ComplexEstimate w_diamond_hat(const CouplingSpec& coupling, double nu, int sign);

/// Free-bath part of the coupling force:
///   phi0(t) = sum_k w_k kappa(nu_k) (xi0_k cos(nu_k t) + xidot0_k / nu_k sin(nu_k t)).
double noise_term(const CouplingSpec& coupling, const BathState& init, const SpectralGrid& grid, double t);
double noise_term(const CouplingSpec& coupling, const BathInitSpec& init, const SpectralGrid& grid, double t);

/// Reduced (generalised Langevin) dynamics: baths replaced by phi0(t) + int_0^t w(tau) q(t - tau) dtau.
///
/// Kick-drift-kick in the oscillators with a trapezoid convolution on the step grid (dtau must
/// equal dt). Bath energies are reconstructed from the running transform of q, so the returned
/// Trajectory carries the same columns as `simulate`.
Trajectory integrate_gle(const CoupledSystem& sys, const FullState& init, const std::vector<MemoryKernel>& kernels,
                         const IntegratorConfig& cfg);

struct ThetaSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> theta;  // [sample][thermostat], phi_m - K_m q_m
  std::vector<double> tail_sup;            // per thermostat over the final `tail_fraction`
  double tail_fraction = 0.25;
};

ThetaSeries theta_decomposition(const Trajectory& traj, std::span<const double> K, double tail_fraction = 0.25);

}  // namespace heatbath
