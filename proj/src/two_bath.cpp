#include <cmath>
#include <complex>
#include <stdexcept>

#include "heatbath/analysis.hpp"

namespace heatbath {

TwoBathModes two_bath_transform(const BathState& first, const BathState& second) {
  if (first.xi.size() != second.xi.size()) throw std::invalid_argument("baths live on different grids");
  const std::size_t n = first.xi.size();
  const double r = 1.0 / std::sqrt(2.0);
  TwoBathModes out{BathState::zero(n), BathState::zero(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.zeta.xi[k] = r * (first.xi[k] + second.xi[k]);
    out.eta.xi[k] = r * (first.xi[k] - second.xi[k]);
    out.zeta.xidot[k] = r * (first.xidot[k] + second.xidot[k]);
    out.eta.xidot[k] = r * (first.xidot[k] - second.xidot[k]);
  }
  return out;
}

TwoBathModes two_bath_transform(const CoupledSystem& sys, const FullState& state) {
  const auto& net = sys.network();
  if (net.size() != 1 || net.baths.size() != 2)
    throw std::invalid_argument("two-bath transform needs one oscillator and exactly two thermostats");
  if (!(net.baths[0].coupling == net.baths[1].coupling))
    throw std::invalid_argument("two-bath transform needs identical couplings");
  return two_bath_transform(state.baths.at(0), state.baths.at(1));
}

std::pair<BathState, BathState> inverse_two_bath_transform(const TwoBathModes& modes) {
  // The rotation is its own inverse.
  TwoBathModes back = two_bath_transform(modes.zeta, modes.eta);
  return {std::move(back.zeta), std::move(back.eta)};
}

double bath_overlap(const BathState& a, const BathState& b, const SpectralGrid& grid) {
  double s = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double nu = grid.nodes[k];
    s += grid.weights[k] * (a.xidot[k] * b.xidot[k] + nu * nu * a.xi[k] * b.xi[k]);
  }
  return s;
}

TwoBathReport equilibrium_defect(const CoupledSystem& sys, const FullState& init, const Trajectory& traj,
                                 double truncation, const CriticalSet* critical) {
  const TwoBathModes modes0 = two_bath_transform(sys, init);
  if (traj.samples() < 2) throw std::invalid_argument("trajectory too short");
  if (!(truncation > traj.times.front()) || truncation > traj.times.back() * (1.0 + 1e-12))
    throw std::invalid_argument("truncation time must lie inside the trajectory");
  const auto& grid = sys.grid();
  const auto& coupling = sys.network().baths[0].coupling;
  const std::size_t nmodes = grid.size();

  TwoBathReport r;
  r.truncation_time = truncation;
  r.e1_initial = traj.bath_energy.front()[0];
  r.e2_initial = traj.bath_energy.front()[1];

  // Truncated transform q_hat(nu) = int_0^T exp(-i nu t) q(t) dt by the trapezoid rule on the samples.
  std::size_t last = 0;
  while (last + 1 < traj.samples() && traj.times[last + 1] <= truncation * (1.0 + 1e-12)) ++last;
  const double t0 = traj.times.front();
  std::vector<std::complex<double>> q_hat(nmodes, {0.0, 0.0});
  for (std::size_t k = 0; k < nmodes; ++k) {
    const double nu = grid.nodes[k];
    const double h = traj.sample_dt;
    const std::complex<double> rot(std::cos(nu * h), -std::sin(nu * h));
    std::complex<double> z(std::cos(nu * t0), -std::sin(nu * t0));
    std::complex<double> acc = 0.5 * z * traj.q[0][0];
    for (std::size_t i = 1; i <= last; ++i) {
      z = (i % 1024 == 0) ? std::complex<double>(std::cos(nu * traj.times[i]), -std::sin(nu * traj.times[i])) : z * rot;
      acc += (i == last ? 0.5 : 1.0) * z * traj.q[i][0];
    }
    q_hat[k] = acc * h;
  }

  const double s2 = std::sqrt(2.0);
  double d = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < nmodes; ++k) {
    const double nu = grid.nodes[k];
    const std::complex<double> eta0(modes0.eta.xidot[k], nu * modes0.eta.xi[k]);
    const std::complex<double> zeta0(modes0.zeta.xidot[k], nu * modes0.zeta.xi[k]);
    const std::complex<double> term = std::conj(eta0) * (zeta0 + s2 * coupling(nu) * q_hat[k]);
    d += grid.weights[k] * term.real();
    scale += grid.weights[k] * std::abs(term);
  }
  r.defect = d;
  r.eta_energy_initial = bath_energy(modes0.eta, grid);
  r.e1_final = traj.bath_energy[last][0];
  r.e2_final = traj.bath_energy[last][1];
  r.observed_difference = r.e1_final - r.e2_final;
  r.agreement_error = std::abs(r.observed_difference - r.defect);
  r.indeterminate = std::abs(d) <= 1e-10 * std::max(scale, 1e-300) || scale == 0.0;

  if (critical && !critical->empty()) {
    const std::size_t idx = dist_to_critical_set(traj.q[last], *critical).second;
    const double qc = critical->points[idx].q[0];
    double limit = traj.energy.front() - effective_potential(sys.network(), sys.K(), std::span<const double>(&qc, 1));
    for (std::size_t m = 0; m < sys.baths(); ++m) limit += 0.5 * sys.K()[m] * qc * qc;
    r.energy_sum_limit = limit;
    r.energy_sum_defect = std::abs(r.e1_final + r.e2_final - limit);
  }
  return r;
}

}  // namespace heatbath
