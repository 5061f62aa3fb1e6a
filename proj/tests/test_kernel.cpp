#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "heatbath/kernel.hpp"

using namespace heatbath;
using boost::math::quadrature::gauss_kronrod;

namespace {

const double kPi = std::acos(-1.0);

// Closed form for kappa = nu exp(-nu^2/2).
double w_gauss_unit(double tau) { return std::sqrt(kPi) * tau / 2 * std::exp(-tau * tau / 4); }

NetworkSpec quartic_single(CouplingSpec c = CouplingSpec::gauss(1, 1)) {
  NetworkSpec net;
  net.vertex_ids = {1};
  net.pins = {Potential::polynomial({0, 0, 0.5, 0, 0.25})};
  net.baths = {{0, c}};
  return net;
}

}  // namespace

TEST_CASE("memory kernel matches the gauss closed form") {
  const MemoryKernel k = build_kernel(CouplingSpec::gauss(1, 1), 1e-3, 12.0);
  REQUIRE(k.w.size() == 12001);
  CHECK(k.w[0] == 0.0);
  CHECK(k.tau_max() == doctest::Approx(12.0));
  double worst = 0.0;
  for (std::size_t l = 0; l < k.w.size(); ++l) worst = std::max(worst, std::abs(k.w[l] - w_gauss_unit(double(l) * 1e-3)));
  CHECK(worst < 1e-8);
  CHECK(k.tail < 1e-10);
  CHECK(std::abs(k.integral(20.0) - std::sqrt(kPi)) < 1e-6);
  CHECK(k.integral(0.0) == 0.0);
}

TEST_CASE("memory kernel scales with amplitude and sigma") {
  // a^2 and sigma enter as w(tau) = a^2 sigma^2 w_unit(sigma tau).
  const MemoryKernel k = build_kernel(CouplingSpec::gauss(0.5, 2.0), 1e-2, 8.0);
  for (std::size_t l = 0; l < k.w.size(); l += 37) {
    const double tau = double(l) * 1e-2;
    CHECK(std::abs(k.w[l] - 0.25 * 4.0 * w_gauss_unit(2.0 * tau)) < 1e-8);
  }
}

TEST_CASE("memory kernel for the rational profile agrees with direct quadrature") {
  const CouplingSpec c = CouplingSpec::rational(1, 2);
  const MemoryKernel k = build_kernel(c, 0.05, 60.0, 1e-6);
  for (double tau : {0.5, 1.0, 2.0, 4.0, 7.5}) {
    const auto l = std::size_t(std::lround(tau / 0.05));
    const double ref = 2 * gauss_kronrod<double, 61>::integrate(
                               [&](double nu) { return c(nu) * c.over_nu(nu) * std::sin(nu * tau); }, 0.0, 400.0, 20, 1e-14);
    CHECK(std::abs(k.w[l] - ref) < 1e-8);
  }
}

TEST_CASE("build_kernel rejects bad lag grids") {
  CHECK_THROWS_AS(build_kernel(CouplingSpec::gauss(1, 1), 1e-2, 2.0), std::invalid_argument);    // tail not decayed
  CHECK_THROWS_AS(build_kernel(CouplingSpec::gauss(1, 1), 0.007, 12.0), std::invalid_argument);  // not a multiple
  CHECK_THROWS_AS(build_kernel(CouplingSpec::gauss(1, 1), 0.0, 12.0), std::invalid_argument);
}

TEST_CASE("w_diamond_hat at zero frequency equals K") {
  for (const auto& c : {CouplingSpec::gauss(1, 1), CouplingSpec::rational(1, 2), CouplingSpec::gauss(0.6, 1.5)}) {
    for (int sign : {1, -1}) {
      const ComplexEstimate e = w_diamond_hat(c, 0.0, sign);
      CHECK(std::abs(e.value - std::complex<double>(compute_K(c), 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("w_diamond_hat: branches differ by the full transform") {
  for (const auto& c : {CouplingSpec::gauss(1, 1), CouplingSpec::rational(1, 3)}) {
    for (double nu : {-2.0, -0.3, 0.1, 0.7, 1.9}) {
      const std::complex<double> diff = w_diamond_hat(c, nu, 1).value - w_diamond_hat(c, nu, -1).value;
      const std::complex<double> expect(0.0, -2 * kPi * c(nu) * c.over_nu(nu));
      CHECK(std::abs(diff - expect) < 1e-9);
    }
  }
}

TEST_CASE("w_diamond_hat equals the one-sided transform of the time kernel") {
  // For sign +1: int_0^inf w(t) exp(-i nu t) dt.
  const CouplingSpec c = CouplingSpec::gauss(1, 1);
  for (double nu : {0.25, 0.8, 1.5, 3.0}) {
    const double re = gauss_kronrod<double, 61>::integrate([&](double t) { return w_gauss_unit(t) * std::cos(nu * t); },
                                                           0.0, 40.0, 15, 1e-14);
    const double im = -gauss_kronrod<double, 61>::integrate([&](double t) { return w_gauss_unit(t) * std::sin(nu * t); },
                                                            0.0, 40.0, 15, 1e-14);
    const ComplexEstimate e = w_diamond_hat(c, nu, 1);
    CHECK(std::abs(e.value.real() - re) < 1e-8);
    CHECK(std::abs(e.value.imag() - im) < 1e-8);
    CHECK(e.error < 1e-8);
  }
  CHECK_THROWS_AS(w_diamond_hat(c, 1.0, 0), std::invalid_argument);
}

TEST_CASE("noise term") {
  const CouplingSpec c = CouplingSpec::gauss(1, 1);
  const SpectralGrid g = build_grid(8, 1024);
  CHECK(noise_term(c, BathInitSpec::zero(), g, 3.7) == 0.0);

  const BathState packet = init_bath(BathInitSpec::gauss_packet(0.2, 0.1, 1), c, g);
  CHECK(noise_term(c, packet, g, 0.0) == coupling_force(packet, c, g));
  double tail = 0.0;
  for (double t = 100; t <= 200; t += 0.5) tail = std::max(tail, std::abs(noise_term(c, packet, g, t)));
  CHECK(tail < 1e-3);

  // A free bath evolves by rotation, so phi0(t) is the coupling force of the rotated state.
  BathState rotated = packet;
  const double t = 1.3;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double nu = g.nodes[k];
    rotated.xi[k] = packet.xi[k] * std::cos(nu * t) + packet.xidot[k] * std::sin(nu * t) / nu;
  }
  CHECK(noise_term(c, packet, g, t) == doctest::Approx(coupling_force(rotated, c, g)).epsilon(1e-12));
}

TEST_CASE("GLE without thermostats is velocity Verlet") {
  NetworkSpec net;
  net.vertex_ids = {1, 2};
  net.pins = {Potential::polynomial({0, 0, 0.5, 0, 0.25}), Potential::harmonic(2.0)};
  net.edges = {{0, 1, Potential::harmonic(0.3)}};
  const CoupledSystem sys(net, build_grid(1, 2));
  const FullState s = make_state(sys, {0.4, -0.2}, {0.1, 0.3}, {});
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.horizon = 50;
  cfg.sample_every = 10;
  const Trajectory a = simulate(sys, s, cfg);
  const Trajectory b = integrate_gle(sys, s, {}, cfg);
  REQUIRE(a.samples() == b.samples());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples(); ++i)
    for (std::size_t j = 0; j < 2; ++j) worst = std::max(worst, std::abs(a.q[i][j] - b.q[i][j]));
  CHECK(worst < 1e-12);
}

TEST_CASE("GLE reproduces the explicit bath at short horizons") {
  const CoupledSystem sys(quartic_single(), build_grid(8, 1024));
  const FullState s = make_state(sys, {0.5}, {0.3}, {BathInitSpec::gauss_packet(0.2, 0.1, 1)});
  IntegratorConfig cfg;
  cfg.horizon = 20;
  cfg.sample_every = 10;
  const Trajectory direct = simulate(sys, s, cfg);
  const Trajectory gle = integrate_gle(sys, s, {build_kernel(sys.network().baths[0].coupling, cfg.dt, 12.0)}, cfg);
  REQUIRE(direct.samples() == gle.samples());
  double dq = 0.0, de = 0.0;
  for (std::size_t i = 0; i < direct.samples(); ++i) {
    dq = std::max(dq, std::abs(direct.q[i][0] - gle.q[i][0]));
    de = std::max(de, std::abs(direct.bath_energy[i][0] - gle.bath_energy[i][0]));
  }
  CHECK(dq < 1e-5);
  CHECK(de < 1e-5);
  CHECK(relative_energy_drift(gle) < 1e-5);
}

TEST_CASE("integrate_gle input checks") {
  const CoupledSystem sys(quartic_single(), build_grid(8, 1024));
  const FullState s = make_state(sys, {0.5}, {0.3}, {BathInitSpec::zero()});
  IntegratorConfig cfg;
  cfg.horizon = 1;
  CHECK_THROWS_AS(integrate_gle(sys, s, {}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(integrate_gle(sys, s, {build_kernel(CouplingSpec::gauss(1, 1), 2e-3, 12.0)}, cfg),
                  std::invalid_argument);
}

TEST_CASE("theta decomposition") {
  const CoupledSystem sys(quartic_single(), build_grid(8, 1024));
  const double qc = std::sqrt(sys.K()[0] - 1.0);
  IntegratorConfig cfg;
  cfg.horizon = 20;
  cfg.sample_every = 100;

  const Trajectory still = simulate(sys, make_state(sys, {qc}, {0.0}, {BathInitSpec::dressed(qc)}), cfg);
  const ThetaSeries th = theta_decomposition(still, sys.K());
  REQUIRE(th.theta.size() == still.samples());
  for (const auto& row : th.theta) CHECK(std::abs(row[0]) < 1e-10);
  CHECK(th.tail_sup[0] < 1e-10);

  // Even initial data against an odd coupling never pushes the oscillator.
  FullState ghost = make_state(sys, {0.0}, {0.0}, {BathInitSpec::zero()});
  for (std::size_t k = 0; k < sys.modes(); ++k) ghost.baths[0].xidot[k] = std::exp(-sys.grid().nodes[k] * sys.grid().nodes[k]);
  const ThetaSeries g = theta_decomposition(simulate(sys, ghost, cfg), sys.K());
  CHECK(g.tail_sup[0] < 1e-13);

  CHECK_THROWS_AS(theta_decomposition(still, {}), std::invalid_argument);
  CHECK_THROWS_AS(theta_decomposition(still, sys.K(), 0.0), std::invalid_argument);
}
