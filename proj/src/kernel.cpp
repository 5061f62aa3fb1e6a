#include "heatbath/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "heatbath/errors.hpp"

namespace heatbath {

double MemoryKernel::integral(double t) const {
  if (w.size() < 2 || t <= 0.0) return 0.0;
  const std::size_t last = std::min(w.size() - 1, static_cast<std::size_t>(std::floor(t / dtau + 1e-9)));
  double acc = 0.5 * (w[0] + w[last]);
  for (std::size_t l = 1; l < last; ++l) acc += w[l];
  return acc * dtau;
}

MemoryKernel build_kernel(const CouplingSpec& coupling, double dtau, double tau_max, double tail_tolerance) {
  coupling.validate();
  if (!(dtau > 0.0) || !(tau_max > 0.0)) throw std::invalid_argument("kernel lag grid needs dtau > 0 and tau_max > 0");
  const double ratio = tau_max / dtau;
  const long lags = std::lround(ratio);
  if (lags < 1 || std::abs(ratio - static_cast<double>(lags)) > 1e-9 * ratio)
    throw std::invalid_argument("tau_max must be a multiple of dtau");

  MemoryKernel k;
  k.dtau = dtau;
  k.K = compute_K(coupling);
  k.w.resize(static_cast<std::size_t>(lags) + 1);
  // w(tau) = 2 int_0^inf (kappa^2/nu) sin(nu tau) dnu, a one-sided sine transform.
  boost::math::quadrature::ooura_fourier_sin<double> sine;
  auto f = [&](double nu) {
    const double r = coupling.over_nu(nu);
    return nu * r * r;
  };
  k.w[0] = 0.0;
  for (std::size_t l = 1; l < k.w.size(); ++l) {
    const double tau = dtau * static_cast<double>(l);
    k.w[l] = 2.0 * sine.integrate(f, tau).first;
  }
  const std::size_t from = k.w.size() - std::max<std::size_t>(1, k.w.size() / 100);
  for (std::size_t l = from; l < k.w.size(); ++l) k.tail = std::max(k.tail, std::abs(k.w[l]));
  if (!(k.tail <= tail_tolerance))
    throw std::invalid_argument(
        fmt::format("kernel tail {:.3g} at tau_max = {:g} exceeds tolerance {:.3g}", k.tail, tau_max, tail_tolerance));
  return k;
}

void write_kernel_csv(std::ostream& out, const MemoryKernel& kernel) {
  out << "tau,w\n";
  for (std::size_t l = 0; l < kernel.w.size(); ++l)
    fmt::print(out, "{:.17g},{:.17g}\n", kernel.dtau * static_cast<double>(l), kernel.w[l]);
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Accum {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
void integrate_finite(F f, double a, double b, Accum& acc) {
  double err = 0.0;
  acc.value += GK::integrate(f, a, b, 15, 1e-12, &err);
  acc.error += err;
}

// Adaptive integral on [a, b]; infinite bounds are split at +-cut so the mapped tail only sees the decay.
template <class F>
void integrate(F f, double a, double b, Accum& acc, double cut) {
  if (std::isinf(a) && std::isinf(b)) {
    integrate_finite(f, a, -cut, acc);
    integrate_finite(f, -cut, cut, acc);
    integrate_finite(f, cut, b, acc);
  } else if (std::isinf(b) && a < cut) {
    integrate_finite(f, a, cut, acc);
    integrate_finite(f, cut, b, acc);
  } else if (std::isinf(a) && b > -cut) {
    integrate_finite(f, a, -cut, acc);
    integrate_finite(f, -cut, b, acc);
  } else {
    integrate_finite(f, a, b, acc);
  }
}

}  // namespace

ComplexEstimate w_diamond_hat(const CouplingSpec& coupling, double nu, int sign) {
  coupling.validate();
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (!std::isfinite(nu)) throw std::invalid_argument("frequency must be finite");
  const std::complex<double> I(0.0, 1.0);
  // w_hat(l) = 2 pi kappa^2 / (i l) = -2 pi i kappa(l) * (kappa(l)/l); zero at l = 0 by continuity.
  auto w_hat = [&](double l) -> std::complex<double> { return -2.0 * M_PI * I * coupling(l) * coupling.over_nu(l); };
  // l w_hat(l) = -2 pi i kappa^2(l), so the principal value term is -p.v. int kappa^2 / (nu^2 - l^2), real.
  // kappa^2 is even: fold onto [0, inf) and subtract kappa^2(a) there, using p.v. int_0^inf 1/(a^2 - l^2) = 0.
  Accum acc;
  const double a = std::abs(nu);
  const double cut = default_cutoff(coupling) + 2.0 * a;
  auto g = [&](double l) {
    const double k = coupling(l);
    return k * k;
  };
  double pv_real = 0.0;
  if (a == 0.0) {
    // Removable singularity: kappa^2 / l^2.
    integrate([&](double l) {
      const double r = coupling.over_nu(l);
      return r * r;
    }, -kInf, kInf, acc, cut);
    pv_real = acc.value;
  } else {
    const double ga = g(a);
    integrate_finite([&](double l) { return (g(l) - ga) / ((a - l) * (a + l)); }, 0.0, a, acc);
    integrate_finite([&](double l) { return (g(l) - ga) / ((a - l) * (a + l)); }, a, 2.0 * a, acc);
    integrate([&](double l) { return g(l) / ((a - l) * (a + l)); }, 2.0 * a, kInf, acc, cut);
    pv_real = -2.0 * (acc.value + ga * std::log(3.0) / (2.0 * a));
  }
  ComplexEstimate out;
  out.value = static_cast<double>(sign) * 0.25 * (w_hat(nu) - w_hat(-nu)) + std::complex<double>(pv_real, 0.0);
  out.error = 2.0 * acc.error;
  return out;
}

double noise_term(const CouplingSpec& coupling, const BathState& init, const SpectralGrid& grid, double t) {
  if (init.xi.size() != grid.size()) throw std::invalid_argument("bath state does not match grid");
  double phi = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double nu = grid.nodes[k];
    phi += grid.weights[k] * coupling(nu) * (init.xi[k] * std::cos(nu * t) + init.xidot[k] / nu * std::sin(nu * t));
  }
  return phi;
}

double noise_term(const CouplingSpec& coupling, const BathInitSpec& init, const SpectralGrid& grid, double t) {
  return noise_term(coupling, init_bath(init, coupling, grid), grid, t);
}

namespace {

// Tracks, per thermostat and mode, the phasor z = exp(i nu t), the noise amplitude and the running
// transform int_0^t exp(-i nu s) q(s) ds used to rebuild the bath energy.
class BathShadow {
 public:
  BathShadow(const CoupledSystem& sys, std::size_t m, const BathState& init, double dt)
      : nodes_(&sys.grid().nodes), weights_(&sys.grid().weights), dt_(dt) {
    const std::size_t n = sys.modes();
    const auto& coupling = sys.network().baths[m].coupling;
    z_.assign(n, {1.0, 0.0});
    rot_.resize(n);
    amp_.resize(n);
    kappa_.resize(n);
    bold0_.resize(n);
    transform_.assign(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      const double nu = (*nodes_)[k];
      rot_[k] = {std::cos(nu * dt), std::sin(nu * dt)};
      kappa_[k] = coupling(nu);
      // Re(A z) = w kappa (xi0 cos + xidot0/nu sin)
      amp_[k] = (*weights_)[k] * kappa_[k] * std::complex<double>(init.xi[k], -init.xidot[k] / nu);
      bold0_[k] = {init.xidot[k], nu * init.xi[k]};
    }
  }

  double noise() const {
    double phi = 0.0;
    for (std::size_t k = 0; k < z_.size(); ++k) phi += amp_[k].real() * z_[k].real() - amp_[k].imag() * z_[k].imag();
    return phi;
  }

  /// Advance from step n to n+1 with q values at both ends.
  void advance(long n_next, double q_prev, double q_next) {
    const double h2 = 0.5 * dt_;
    const bool resync = n_next % 1024 == 0;
    const double t = static_cast<double>(n_next) * dt_;
    for (std::size_t k = 0; k < z_.size(); ++k) {
      const std::complex<double> before = std::conj(z_[k]);
      z_[k] = resync ? std::complex<double>(std::cos((*nodes_)[k] * t), std::sin((*nodes_)[k] * t)) : z_[k] * rot_[k];
      transform_[k] += h2 * (before * q_prev + std::conj(z_[k]) * q_next);
    }
  }

  double energy() const {
    double e = 0.0;
    for (std::size_t k = 0; k < z_.size(); ++k) e += (*weights_)[k] * std::norm(bold0_[k] + kappa_[k] * transform_[k]);
    return 0.5 * e;
  }

 private:
  const std::vector<double>* nodes_;
  const std::vector<double>* weights_;
  double dt_;
  std::vector<std::complex<double>> z_, rot_, amp_, bold0_, transform_;
  std::vector<double> kappa_;
};

double convolve(const MemoryKernel& kernel, const std::vector<double>& history, long n) {
  const long lmax = static_cast<long>(kernel.w.size()) - 1;
  const long last = std::min(n, lmax);
  if (last == 0) return 0.0;
  const double* w = kernel.w.data();
  const double* q = history.data();
  double acc = 0.5 * (w[0] * q[n] + w[last] * q[n - last]);
  for (long l = 1; l < last; ++l) acc += w[l] * q[n - l];
  return acc * kernel.dtau;
}

}  // namespace

Trajectory integrate_gle(const CoupledSystem& sys, const FullState& init, const std::vector<MemoryKernel>& kernels,
                         const IntegratorConfig& cfg) {
  check_integrator_config(cfg, sys.grid(), sys.baths() > 0);
  if (kernels.size() != sys.baths()) throw std::invalid_argument("need one memory kernel per thermostat");
  for (const auto& k : kernels) {
    if (std::abs(k.dtau - cfg.dt) > 1e-12 * cfg.dt) throw std::invalid_argument("kernel dtau must equal dt");
    if (k.w.empty()) throw std::invalid_argument("empty memory kernel");
  }
  if (init.q.size() != sys.vertices() || init.p.size() != sys.vertices() || init.baths.size() != sys.baths())
    throw std::invalid_argument("initial state does not match the system");

  const std::size_t nv = sys.vertices();
  const std::size_t nb = sys.baths();
  const long steps = cfg.steps();
  const double h = cfg.dt;
  const auto& net = sys.network();

  std::vector<BathShadow> shadows;
  std::vector<std::vector<double>> history(nb);
  for (std::size_t m = 0; m < nb; ++m) {
    shadows.emplace_back(sys, m, init.baths[m], h);
    history[m].reserve(static_cast<std::size_t>(steps) + 1);
    history[m].push_back(init.q[sys.bath_vertex(m)]);
  }

  std::vector<double> q = init.q, p = init.p, force(nv), phi(nb);
  auto compute_force = [&](long n) {
    network_force(net, q, force);
    for (std::size_t m = 0; m < nb; ++m) {
      phi[m] = shadows[m].noise() + convolve(kernels[m], history[m], n);
      force[sys.bath_vertex(m)] += phi[m];
    }
  };

  Trajectory traj;
  traj.vertex_ids = net.vertex_ids;
  for (std::size_t m = 0; m < nb; ++m) traj.bath_vertices.push_back(sys.bath_vertex(m));
  traj.sample_dt = cfg.sample_dt();
  traj.recurrence_horizon = nb > 0 ? recurrence_horizon(sys.grid()) : std::numeric_limits<double>::infinity();

  auto record = [&](long n) {
    traj.times.push_back(init.t + static_cast<double>(n) * h);
    traj.q.push_back(q);
    traj.p.push_back(p);
    std::vector<double> e(nb);
    double total = network_potential(net, q);
    for (double x : p) total += 0.5 * x * x;
    for (std::size_t m = 0; m < nb; ++m) {
      e[m] = shadows[m].energy();
      total += e[m] - q[sys.bath_vertex(m)] * phi[m];
    }
    traj.energy.push_back(total);
    traj.bath_energy.push_back(std::move(e));
    traj.phi.push_back(phi);
  };

  compute_force(0);
  record(0);
  for (long n = 0; n < steps; ++n) {
    for (std::size_t j = 0; j < nv; ++j) {
      p[j] += 0.5 * h * force[j];
      q[j] += h * p[j];
    }
    for (std::size_t m = 0; m < nb; ++m) {
      const double qm = q[sys.bath_vertex(m)];
      shadows[m].advance(n + 1, history[m].back(), qm);
      history[m].push_back(qm);
    }
    compute_force(n + 1);
    for (std::size_t j = 0; j < nv; ++j) p[j] += 0.5 * h * force[j];
    if ((n + 1) % cfg.sample_every == 0) {
      for (std::size_t j = 0; j < nv; ++j)
        if (!std::isfinite(q[j]) || !std::isfinite(p[j]))
          throw NumericalFailure(fmt::format("non-finite GLE state at t = {:g}", (n + 1) * h));
      record(n + 1);
    }
  }
  return traj;
}

ThetaSeries theta_decomposition(const Trajectory& traj, std::span<const double> K, double tail_fraction) {
  const std::size_t nb = traj.bath_vertices.size();
  if (K.size() != nb) throw std::invalid_argument("need one K per thermostat");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("tail fraction must be in (0, 1]");
  ThetaSeries out;
  out.times = traj.times;
  out.tail_fraction = tail_fraction;
  out.tail_sup.assign(nb, 0.0);
  const std::size_t n = traj.samples();
  const double t_end = n ? traj.times.back() : 0.0;
  const double t_start = n ? t_end - tail_fraction * (t_end - traj.times.front()) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> th(nb);
    for (std::size_t m = 0; m < nb; ++m) {
      th[m] = traj.phi[i][m] - K[m] * traj.q[i][traj.bath_vertices[m]];
      if (traj.times[i] >= t_start) out.tail_sup[m] = std::max(out.tail_sup[m], std::abs(th[m]));
    }
    out.theta.push_back(std::move(th));
  }
  return out;
}

}  // namespace heatbath
