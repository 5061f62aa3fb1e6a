#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "heatbath/analysis.hpp"
#include "heatbath/errors.hpp"
#include "heatbath/kernel.hpp"

using namespace heatbath;

namespace {

const double kPi = std::acos(-1.0);

NetworkSpec quartic_single() {
  NetworkSpec net;
  net.vertex_ids = {1};
  net.pins = {Potential::polynomial({0, 0, 0.5, 0, 0.25})};
  net.baths = {{0, CouplingSpec::gauss(1, 1)}};
  return net;
}

NetworkSpec two_baths(double a1 = 0.6, double a2 = 0.6) {
  NetworkSpec net;
  net.vertex_ids = {1};
  net.pins = {Potential::polynomial({0, 0, 0.5, 0, 0.25})};
  net.baths = {{0, CouplingSpec::gauss(a1, 1)}, {0, CouplingSpec::gauss(a2, 1)}};
  net.allow_shared_baths = true;
  return net;
}

CriticalSet manual_set(std::vector<std::vector<double>> pts) {
  CriticalSet s;
  for (auto& p : pts) {
    CriticalPoint c;
    c.q = Eigen::Map<Eigen::VectorXd>(p.data(), Eigen::Index(p.size()));
    s.points.push_back(c);
  }
  return s;
}

BathState random_bath(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  BathState b = BathState::zero(n);
  for (std::size_t k = 0; k < n; ++k) b.xi[k] = d(rng), b.xidot[k] = d(rng);
  return b;
}

}  // namespace

TEST_CASE("critical points of the single quartic") {
  const std::vector<double> K = {std::sqrt(kPi)};
  const CriticalSet cs = find_critical_points(quartic_single(), K);
  REQUIRE(cs.size() == 3);
  const double qc = std::sqrt(std::sqrt(kPi) - 1.0);
  CHECK(std::abs(cs.points[0].q[0] + qc) < 1e-8);
  CHECK(std::abs(cs.points[1].q[0]) < 1e-8);
  CHECK(std::abs(cs.points[2].q[0] - qc) < 1e-8);
  CHECK(cs.points[0].morse_index == 0);
  CHECK(cs.points[1].morse_index == 1);
  CHECK(cs.points[2].morse_index == 0);
  // V_eff'' = 1 - K + 3 q^2
  CHECK(cs.points[1].min_abs_eigenvalue == doctest::Approx(std::sqrt(kPi) - 1.0).epsilon(1e-8));
  CHECK(cs.points[2].min_abs_eigenvalue == doctest::Approx(2 * (std::sqrt(kPi) - 1.0)).epsilon(1e-8));
  CHECK_FALSE(cs.has_degenerate(1e-8));
  for (const auto& p : cs.points) CHECK(p.gradient_norm < 1e-10);
}

TEST_CASE("critical points: harmonic network has one, pure quartic is degenerate") {
  NetworkSpec h;
  h.vertex_ids = {1, 2, 3};
  h.pins = {Potential::harmonic(1), Potential::harmonic(2), Potential::harmonic(0.5)};
  h.edges = {{0, 1, Potential::harmonic(1)}, {1, 2, Potential::harmonic(1)}};
  const CriticalSet one = find_critical_points(h, {}, {.starts_per_dimension = 8});
  REQUIRE(one.size() == 1);
  CHECK(one.points[0].q.norm() < 1e-10);
  CHECK(one.points[0].morse_index == 0);

  NetworkSpec d;
  d.vertex_ids = {1};
  d.pins = {Potential::polynomial({0, 0, 0, 0, 0.25})};
  const CriticalSet deg = find_critical_points(d, {});
  REQUIRE(deg.size() == 1);
  CHECK(deg.has_degenerate(1e-8));

  CHECK_THROWS_AS(find_critical_points(h, {}, {.box = 0.0}), std::invalid_argument);
}

TEST_CASE("critical search is reproducible and seed-stable") {
  NetworkSpec net;
  net.vertex_ids = {1, 2};
  net.pins = {Potential::polynomial({0, 0, -0.5, 0, 0.25}), Potential::polynomial({0, 0, -0.5, 0, 0.25})};
  net.edges = {{0, 1, Potential::harmonic(0.2)}};
  const CriticalSet a = find_critical_points(net, {});
  const CriticalSet b = find_critical_points(net, {});
  const CriticalSet c = find_critical_points(net, {}, {.seed = 17});
  REQUIRE(a.size() == 9);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points[i].q == b.points[i].q);
    CHECK((a.points[i].q - c.points[i].q).norm() < 1e-8);
  }
}

TEST_CASE("distance to the critical set") {
  const CriticalSet s = manual_set({{0, 0}, {1, 0}, {0, 2}});
  const std::vector<double> mid = {0.5, 0.0};
  CHECK(dist_to_critical_set(mid, s) == std::pair<double, std::size_t>{0.5, 0});
  const std::vector<double> q = {0.3, 0.2};
  auto [d, i] = dist_to_critical_set(q, s);
  CHECK(d == doctest::Approx(std::sqrt(0.13)));
  CHECK(i == 0);
  const std::vector<double> r = {0.9, 0.1};
  CHECK(dist_to_critical_set(r, s).second == 1);
  CHECK_THROWS_AS(dist_to_critical_set(q, CriticalSet{}), std::invalid_argument);
  const std::vector<double> wrong = {0.0};
  CHECK_THROWS_AS(dist_to_critical_set(wrong, s), std::invalid_argument);
}

TEST_CASE("spectral diagnostic") {
  const double h = 0.05;
  std::vector<double> c(1024, 3.0), fast(1024), slow(1024), mixed(1024);
  for (std::size_t i = 0; i < 1024; ++i) {
    const double t = h * double(i);
    fast[i] = std::cos(2 * t);
    slow[i] = 1 + 1e-3 * std::exp(-t / 20);
    mixed[i] = 1 + std::cos(2 * t);
  }
  CHECK(spectral_diagnostic(c, h, 1.0) == 0.0);
  CHECK(spectral_diagnostic(fast, h, 1.0) > 1 - 1e-3);
  CHECK(spectral_diagnostic(slow, h, 1.0) < 1e-6);
  // Windowed power of 1 + cos: 3/8 n for the constant, 3/16 n for the tone.
  CHECK(spectral_diagnostic(mixed, h, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-2));
  std::vector<double> shifted = fast;
  for (double& x : shifted) x *= 7.5;
  CHECK(spectral_diagnostic(shifted, h, 1.0) == doctest::Approx(spectral_diagnostic(fast, h, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(spectral_diagnostic(std::vector<double>(15, 1.0), h, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(spectral_diagnostic(fast, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("convergence report on a stationary run") {
  const CoupledSystem sys(quartic_single(), build_grid(8, 1024));
  const CriticalSet cs = find_critical_points(sys.network(), sys.K());
  const double qc = cs.points[2].q[0];
  IntegratorConfig cfg;
  cfg.horizon = 40;
  cfg.sample_every = 10;
  const Trajectory t = simulate(sys, make_state(sys, {qc}, {0.0}, {BathInitSpec::dressed(qc)}), cfg);
  const ConvergenceReport r = convergence_report(sys, t, cs);
  REQUIRE(r.approached_point.has_value());
  CHECK(*r.approached_point == 2);
  CHECK(r.dist_final < 1e-9);
  CHECK(r.tail_sup_p < 1e-9);
  CHECK(r.tail_sup_qddot < 1e-6);
  CHECK(r.theta_tail[0] < 1e-9);
  CHECK(r.bath_power_tail[0] < 1e-6);
  CHECK(r.slowest_frequency == doctest::Approx(std::sqrt(2 * (sys.K()[0] - 1))).epsilon(1e-8));
  CHECK(r.band == doctest::Approx(0.1 * r.slowest_frequency));
  CHECK(r.spectral_ratio < 1e-6);
  CHECK(r.energy_sum_limit == doctest::Approx(0.5 * sys.K()[0] * qc * qc).epsilon(1e-9));
  CHECK(r.energy_sum_defect < 1e-9);
  CHECK(r.tail_start == doctest::Approx(30.0));

  Trajectory bad = t;
  bad.recurrence_horizon = 60.0;
  CHECK_THROWS_AS(convergence_report(sys, bad, cs), GuardViolation);
  CHECK_THROWS_AS(convergence_report(sys, t, CriticalSet{}), std::invalid_argument);
}

TEST_CASE("two-bath rotation") {
  std::mt19937 rng(11);
  const SpectralGrid g = build_grid(4, 64);
  for (int trial = 0; trial < 10; ++trial) {
    const BathState a = random_bath(64, rng), b = random_bath(64, rng);
    const TwoBathModes m = two_bath_transform(a, b);
    CHECK(bath_energy(m.zeta, g) + bath_energy(m.eta, g) ==
          doctest::Approx(bath_energy(a, g) + bath_energy(b, g)).epsilon(1e-13));
    CHECK(bath_overlap(m.zeta, m.eta, g) == doctest::Approx(bath_energy(a, g) - bath_energy(b, g)).epsilon(1e-12));
    const auto [a2, b2] = inverse_two_bath_transform(m);
    for (std::size_t k = 0; k < 64; ++k) {
      CHECK(std::abs(a2.xi[k] - a.xi[k]) < 1e-14);
      CHECK(std::abs(b2.xidot[k] - b.xidot[k]) < 1e-14);
    }
  }
  const BathState a = random_bath(64, rng);
  const TwoBathModes same = two_bath_transform(a, a);
  CHECK(bath_energy(same.eta, g) == 0.0);
  CHECK_THROWS_AS(two_bath_transform(a, BathState::zero(32)), std::invalid_argument);

  const CoupledSystem mismatched(two_baths(0.6, 0.7), build_grid(8, 64));
  const FullState s = make_state(mismatched, {0.1}, {0.0}, {BathInitSpec::zero(), BathInitSpec::zero()});
  CHECK_THROWS_AS(two_bath_transform(mismatched, s), std::invalid_argument);
}

TEST_CASE("equilibrium defect for identical baths is exactly zero") {
  const CoupledSystem sys(two_baths(), build_grid(8, 1024));
  const auto packet = BathInitSpec::gauss_packet(0.2, 0.1, 1);
  const FullState s = make_state(sys, {0.5}, {0.3}, {packet, packet});
  IntegratorConfig cfg;
  cfg.horizon = 50;
  cfg.sample_every = 10;
  const Trajectory t = simulate(sys, s, cfg);
  const TwoBathReport r = equilibrium_defect(sys, s, t, 50.0);
  CHECK(r.defect == 0.0);
  CHECK(r.eta_energy_initial == 0.0);
  CHECK(r.observed_difference == 0.0);
  CHECK(r.indeterminate);
  CHECK_THROWS_AS(equilibrium_defect(sys, s, t, 60.0), std::invalid_argument);
}

TEST_CASE("equilibrium defect matches the bath energy difference at finite time") {
  const CoupledSystem sys(two_baths(), build_grid(8, 1024));
  const FullState s =
      make_state(sys, {0.5}, {0.3}, {BathInitSpec::gauss_packet(0.2, 0.1, 1), BathInitSpec::zero()});
  IntegratorConfig cfg;
  cfg.horizon = 30;
  cfg.sample_every = 10;
  const Trajectory t = simulate(sys, s, cfg);
  for (double T : {10.0, 30.0}) {
    const TwoBathReport r = equilibrium_defect(sys, s, t, T);
    CHECK(r.truncation_time == T);
    CHECK_FALSE(r.indeterminate);
    CHECK(r.agreement_error < 1e-5 * std::max(1.0, std::abs(r.defect)));
  }
}

TEST_CASE("equilibrium defect: zero zeta and a constant coordinate") {
  // xi_2 = -xi_1 gives zeta0 = 0, so D = sqrt2 Re sum w conj(eta0) kappa q_hat with q_hat of q = 1.
  const CoupledSystem sys(two_baths(), build_grid(8, 256));
  FullState s = make_state(sys, {1.0}, {0.0}, {BathInitSpec::gauss_packet(0.3, 0.2, 1), BathInitSpec::zero()});
  for (std::size_t k = 0; k < sys.modes(); ++k) {
    s.baths[1].xi[k] = -s.baths[0].xi[k];
    s.baths[1].xidot[k] = -s.baths[0].xidot[k];
  }
  Trajectory t;
  t.vertex_ids = {1};
  t.sample_dt = 1e-3;
  const int n = 5001;
  for (int i = 0; i < n; ++i) {
    t.times.push_back(1e-3 * i);
    t.q.push_back({1.0});
    t.p.push_back({0.0});
    t.energy.push_back(0.0);
    t.bath_energy.push_back({0.0, 0.0});
  }
  const double T = 5.0;
  const TwoBathReport r = equilibrium_defect(sys, s, t, T);
  double expect = 0.0;
  const auto& c = sys.network().baths[0].coupling;
  const TwoBathModes m = two_bath_transform(s.baths[0], s.baths[1]);
  for (std::size_t k = 0; k < sys.modes(); ++k) {
    const double nu = sys.grid().nodes[k];
    const std::complex<double> eta0(m.eta.xidot[k], nu * m.eta.xi[k]);
    const std::complex<double> q_hat = (1.0 - std::exp(std::complex<double>(0.0, -nu * T))) / std::complex<double>(0.0, nu);
    expect += sys.grid().weights[k] * (std::conj(eta0) * std::sqrt(2.0) * c(nu) * q_hat).real();
  }
  CHECK(r.defect == doctest::Approx(expect).epsilon(1e-6));
}
