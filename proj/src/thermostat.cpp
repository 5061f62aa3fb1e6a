#include "heatbath/thermostat.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace heatbath {

CouplingSpec CouplingSpec::gauss(double amplitude, double sigma) {
  CouplingSpec c;
  c.family = Family::gauss;
  c.amplitude = amplitude;
  c.sigma = sigma;
  c.validate();
  return c;
}

CouplingSpec CouplingSpec::rational(double amplitude, int power) {
  CouplingSpec c;
  c.family = Family::rational;
  c.amplitude = amplitude;
  c.power = power;
  c.validate();
  return c;
}

void CouplingSpec::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("coupling amplitude must be positive");
  if (family == Family::gauss && (!(sigma > 0.0) || !std::isfinite(sigma)))
    throw std::invalid_argument("gauss coupling needs sigma > 0");
  if (family == Family::rational && power < 2) throw std::invalid_argument("rational coupling needs power >= 2");
}

double CouplingSpec::over_nu(double nu) const {
  switch (family) {
    case Family::gauss:
      return amplitude * std::exp(-nu * nu / (2.0 * sigma * sigma));
    case Family::rational:
      return amplitude / std::pow(1.0 + nu * nu, power);
  }
  return 0.0;
}

double CouplingSpec::operator()(double nu) const { return nu * over_nu(nu); }

std::string CouplingSpec::describe() const {
  if (family == Family::gauss) return fmt::format("gauss(a={}, sigma={})", amplitude, sigma);
  return fmt::format("rational(a={}, p={})", amplitude, power);
}

SpectralGrid build_grid(double nu_max, int count) {
  if (!(nu_max > 0.0) || !std::isfinite(nu_max)) throw std::invalid_argument("grid nu_max must be positive");
  if (count < 2 || count % 2 != 0) throw std::invalid_argument("grid count must be even and at least 2");
  SpectralGrid g;
  g.nu_max = nu_max;
  g.spacing = 2.0 * nu_max / count;
  g.nodes.resize(static_cast<std::size_t>(count));
  g.weights.assign(static_cast<std::size_t>(count), g.spacing);
  // Fill symmetric pairs from the same expression so that nodes[k] == -nodes[count-1-k] exactly.
  const int half = count / 2;
  for (int k = 0; k < half; ++k) {
    const double nu = (k + 0.5) * g.spacing;
    g.nodes[static_cast<std::size_t>(half + k)] = nu;
    g.nodes[static_cast<std::size_t>(half - 1 - k)] = -nu;
  }
  return g;
}

double recurrence_horizon(const SpectralGrid& grid) { return 2.0 * M_PI / grid.spacing; }

double default_cutoff(const CouplingSpec& coupling) {
  coupling.validate();
  if (coupling.family == CouplingSpec::Family::gauss) return 8.0 * coupling.sigma;
  const double a2 = coupling.amplitude * coupling.amplitude;
  const double e = 4.0 * coupling.power - 1.0;
  return std::max(1.0, std::pow(2.0 * a2 / (e * 1e-10), 1.0 / e));
}

double compute_K(const CouplingSpec& coupling, double tolerance) {
  coupling.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
  auto integrand = [&](double nu) {
    const double r = coupling.over_nu(nu);
    return r * r;
  };
  // Finite core plus mapped tail; one mapped interval over the whole half-line under-resolves the core.
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double cut = default_cutoff(coupling);
  double core_error = 0.0;
  double tail_error = 0.0;
  const double half = GK::integrate(integrand, 0.0, cut, 15, 1e-13, &core_error) +
                      GK::integrate(integrand, cut, std::numeric_limits<double>::infinity(), 15, 1e-13, &tail_error);
  const double error = core_error + tail_error;
  if (!std::isfinite(half) || 2.0 * error > tolerance)
    throw std::runtime_error(fmt::format("K quadrature did not converge (error estimate {:g})", 2.0 * error));
  return 2.0 * half;
}

double grid_K(const CouplingSpec& coupling, const SpectralGrid& grid) {
  double k = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = coupling.over_nu(grid.nodes[i]);
    k += grid.weights[i] * r * r;
  }
  return k;
}

BathInitSpec BathInitSpec::gauss_packet(double b, double c, double s) {
  BathInitSpec spec;
  spec.profile = Profile::gauss_packet;
  spec.b = b;
  spec.c = c;
  spec.s = s;
  spec.validate();
  return spec;
}

BathInitSpec BathInitSpec::dressed(double q_ref) {
  BathInitSpec spec;
  spec.profile = Profile::dressed;
  spec.q_ref = q_ref;
  spec.validate();
  return spec;
}

void BathInitSpec::validate() const {
  if (!std::isfinite(b) || !std::isfinite(c) || !std::isfinite(q_ref))
    throw std::invalid_argument("bath init parameters must be finite");
  if (profile == Profile::gauss_packet && !(s > 0.0)) throw std::invalid_argument("gauss_packet needs s > 0");
}

std::string BathInitSpec::describe() const {
  switch (profile) {
    case Profile::zero:
      return "zero";
    case Profile::gauss_packet:
      return fmt::format("gauss_packet(b={}, c={}, s={})", b, c, s);
    case Profile::dressed:
      return fmt::format("dressed(q_ref={})", q_ref);
  }
  return {};
}

double bath_energy(const BathState& state, const SpectralGrid& grid) {
  double e = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double nu = grid.nodes[k];
    e += grid.weights[k] * (state.xidot[k] * state.xidot[k] + nu * nu * state.xi[k] * state.xi[k]);
  }
  return 0.5 * e;
}

double coupling_force(const BathState& state, std::span<const double> weighted_kappa) {
  double phi = 0.0;
  for (std::size_t k = 0; k < weighted_kappa.size(); ++k) phi += weighted_kappa[k] * state.xi[k];
  return phi;
}

double coupling_force(const BathState& state, const CouplingSpec& coupling, const SpectralGrid& grid) {
  if (state.xi.size() != grid.size()) throw std::invalid_argument("bath state does not match grid");
  double phi = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) phi += grid.weights[k] * coupling(grid.nodes[k]) * state.xi[k];
  return phi;
}

BathState init_bath(const BathInitSpec& spec, const CouplingSpec& coupling, const SpectralGrid& grid) {
  spec.validate();
  BathState st = BathState::zero(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double nu = grid.nodes[k];
    switch (spec.profile) {
      case BathInitSpec::Profile::zero:
        break;
      case BathInitSpec::Profile::gauss_packet: {
        const double env = std::exp(-nu * nu / (2.0 * spec.s * spec.s));
        st.xi[k] = spec.b * nu * env;
        st.xidot[k] = spec.c * env;
        break;
      }
      case BathInitSpec::Profile::dressed:
        st.xi[k] = coupling.over_nu(nu) * spec.q_ref / nu;
        break;
    }
  }
  return st;
}

void write_bath_csv(std::ostream& out, const BathState& state, const SpectralGrid& grid) {
  out << "nu,xi,xidot\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", grid.nodes[k], state.xi[k], state.xidot[k]);
}

}  // namespace heatbath
