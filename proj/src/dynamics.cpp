#include "heatbath/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "heatbath/errors.hpp"

namespace heatbath {

CoupledSystem::CoupledSystem(NetworkSpec net, SpectralGrid grid, double k_tolerance)
    : net_(std::move(net)), grid_(std::move(grid)) {
  net_.validate();
  if (grid_.size() == 0 && !net_.baths.empty()) throw std::invalid_argument("thermostats need a spectral grid");
  for (const auto& bath : net_.baths) {
    K_.push_back(compute_K(bath.coupling, k_tolerance));
    K_grid_.push_back(grid_K(bath.coupling, grid_));
    std::vector<double> wk(grid_.size());
    std::vector<double> df(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      const double nu = grid_.nodes[k];
      const double r = bath.coupling.over_nu(nu);
      wk[k] = grid_.weights[k] * nu * r;
      df[k] = r / nu;
    }
    weighted_kappa_.push_back(std::move(wk));
    dressed_factor_.push_back(std::move(df));
  }
}

bool FullState::finite() const {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!ok(q) || !ok(p) || !std::isfinite(t)) return false;
  return std::all_of(baths.begin(), baths.end(), [&](const BathState& b) { return ok(b.xi) && ok(b.xidot); });
}

FullState make_state(const CoupledSystem& sys, std::vector<double> q, std::vector<double> p,
                     const std::vector<BathInitSpec>& bath_init) {
  if (q.size() != sys.vertices() || p.size() != sys.vertices())
    throw std::invalid_argument("initial q and p need one entry per vertex");
  if (bath_init.size() != sys.baths()) throw std::invalid_argument("need one bath initial profile per thermostat");
  FullState s;
  s.q = std::move(q);
  s.p = std::move(p);
  for (std::size_t m = 0; m < sys.baths(); ++m) {
    BathState b = init_bath(bath_init[m], sys.network().baths[m].coupling, sys.grid());
    if (bath_init[m].profile == BathInitSpec::Profile::dressed) {
      // Same expression as the integrator's dressed centre, so a dressed fixed point is exact.
      const auto df = sys.dressed_factor(m);
      for (std::size_t k = 0; k < sys.modes(); ++k) b.xi[k] = df[k] * bath_init[m].q_ref;
    }
    s.baths.push_back(std::move(b));
  }
  return s;
}

FullState time_reversed(FullState state) {
  for (double& x : state.p) x = -x;
  for (auto& b : state.baths)
    for (double& v : b.xidot) v = -v;
  return state;
}

Derivative rhs(const CoupledSystem& sys, const FullState& state) {
  const auto& net = sys.network();
  Derivative d;
  d.dq = state.p;
  d.dp.assign(sys.vertices(), 0.0);
  network_force(net, state.q, d.dp);
  const auto& nodes = sys.grid().nodes;
  for (std::size_t m = 0; m < sys.baths(); ++m) {
    const std::size_t v = sys.bath_vertex(m);
    const BathState& b = state.baths[m];
    d.dp[v] += sys.phi(m, b);
    const double qm = state.q[v];
    const auto& coupling = net.baths[m].coupling;
    BathState db = BathState::zero(sys.modes());
    for (std::size_t k = 0; k < sys.modes(); ++k) {
      const double nu = nodes[k];
      db.xi[k] = b.xidot[k];
      db.xidot[k] = -nu * nu * b.xi[k] + coupling(nu) * qm;
    }
    d.dbaths.push_back(std::move(db));
  }
  return d;
}

double total_energy(const CoupledSystem& sys, const FullState& state) {
  double e = 0.0;
  for (double p : state.p) e += 0.5 * p * p;
  e += network_potential(sys.network(), state.q);
  for (std::size_t m = 0; m < sys.baths(); ++m) {
    e += bath_energy(state.baths[m], sys.grid());
    e -= state.q[sys.bath_vertex(m)] * sys.phi(m, state.baths[m]);
  }
  return e;
}

double total_energy_completed_square(const CoupledSystem& sys, const FullState& state) {
  double e = 0.0;
  for (double p : state.p) e += 0.5 * p * p;
  e += effective_potential(sys.network(), sys.K_grid(), state.q);
  const auto& g = sys.grid();
  for (std::size_t m = 0; m < sys.baths(); ++m) {
    const double qm = state.q[sys.bath_vertex(m)];
    const auto df = sys.dressed_factor(m);
    const BathState& b = state.baths[m];
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double nu = g.nodes[k];
      const double y = b.xi[k] - df[k] * qm;
      e += 0.5 * g.weights[k] * (b.xidot[k] * b.xidot[k] + nu * nu * y * y);
    }
  }
  return e;
}

StrangStepper::StrangStepper(const CoupledSystem& sys, double dt) : sys_(&sys), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto& nodes = sys.grid().nodes;
  const std::size_t n = nodes.size();
  cos_.resize(n);
  sin_over_nu_.resize(n);
  nu_sin_.resize(n);
  one_minus_cos_over_nu2_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double nu = nodes[k];
    const double c = std::cos(nu * dt);
    const double s = std::sin(nu * dt);
    const double half = std::sin(0.5 * nu * dt);
    cos_[k] = c;
    sin_over_nu_[k] = s / nu;
    nu_sin_[k] = nu * s;
    // 1 - cos = 2 sin^2(x/2) avoids cancellation for small nu dt.
    one_minus_cos_over_nu2_[k] = 2.0 * half * half / (nu * nu);
  }
  force_.resize(sys.vertices());
}

void StrangStepper::kick(FullState& state, double h) const {
  network_force(sys_->network(), state.q, force_);
  for (std::size_t m = 0; m < sys_->baths(); ++m) {
    const std::size_t v = sys_->bath_vertex(m);
    force_[v] += sys_->K_grid()[m] * state.q[v];
  }
  for (std::size_t j = 0; j < state.p.size(); ++j) state.p[j] += h * force_[j];
}

void StrangStepper::bath_flow(FullState& state) const {
  const std::size_t n = sys_->modes();
  for (std::size_t m = 0; m < sys_->baths(); ++m) {
    const std::size_t v = sys_->bath_vertex(m);
    const double qm = state.q[v];
    const double* wk = sys_->weighted_kappa(m).data();
    const double* df = sys_->dressed_factor(m).data();
    double* xi = state.baths[m].xi.data();
    double* xd = state.baths[m].xidot.data();
    double impulse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double centre = df[k] * qm;
      const double y = xi[k] - centre;
      const double u = xd[k];
      impulse += wk[k] * (y * sin_over_nu_[k] + u * one_minus_cos_over_nu2_[k]);
      xi[k] = centre + (y * cos_[k] + u * sin_over_nu_[k]);
      xd[k] = -y * nu_sin_[k] + u * cos_[k];
    }
    state.p[v] += impulse;
  }
}

void StrangStepper::step(FullState& state) const {
  const double h = dt_;
  kick(state, 0.5 * h);
  for (std::size_t j = 0; j < state.q.size(); ++j) state.q[j] += 0.5 * h * state.p[j];
  bath_flow(state);
  for (std::size_t j = 0; j < state.q.size(); ++j) state.q[j] += 0.5 * h * state.p[j];
  kick(state, 0.5 * h);
  state.t += h;
}

FullState step_strang(const CoupledSystem& sys, FullState state, double dt) {
  StrangStepper(sys, dt).step(state);
  return state;
}

Rk4Stepper::Rk4Stepper(const CoupledSystem& sys, double dt) : sys_(&sys), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

namespace {

FullState axpy(const FullState& s, double a, const Derivative& d) {
  FullState r = s;
  for (std::size_t j = 0; j < r.q.size(); ++j) {
    r.q[j] += a * d.dq[j];
    r.p[j] += a * d.dp[j];
  }
  for (std::size_t m = 0; m < r.baths.size(); ++m) {
    for (std::size_t k = 0; k < r.baths[m].xi.size(); ++k) {
      r.baths[m].xi[k] += a * d.dbaths[m].xi[k];
      r.baths[m].xidot[k] += a * d.dbaths[m].xidot[k];
    }
  }
  return r;
}

}  // namespace

void Rk4Stepper::step(FullState& state) const {
  const double h = dt_;
  const Derivative k1 = rhs(*sys_, state);
  const Derivative k2 = rhs(*sys_, axpy(state, 0.5 * h, k1));
  const Derivative k3 = rhs(*sys_, axpy(state, 0.5 * h, k2));
  const Derivative k4 = rhs(*sys_, axpy(state, h, k3));
  auto combine = [h](double& x, double a, double b, double c, double d) { x += h / 6.0 * (a + 2.0 * b + 2.0 * c + d); };
  for (std::size_t j = 0; j < state.q.size(); ++j) {
    combine(state.q[j], k1.dq[j], k2.dq[j], k3.dq[j], k4.dq[j]);
    combine(state.p[j], k1.dp[j], k2.dp[j], k3.dp[j], k4.dp[j]);
  }
  for (std::size_t m = 0; m < state.baths.size(); ++m) {
    for (std::size_t k = 0; k < state.baths[m].xi.size(); ++k) {
      combine(state.baths[m].xi[k], k1.dbaths[m].xi[k], k2.dbaths[m].xi[k], k3.dbaths[m].xi[k], k4.dbaths[m].xi[k]);
      combine(state.baths[m].xidot[k], k1.dbaths[m].xidot[k], k2.dbaths[m].xidot[k], k3.dbaths[m].xidot[k],
              k4.dbaths[m].xidot[k]);
    }
  }
  state.t += h;
}

long IntegratorConfig::steps() const { return std::lround(horizon / dt); }

void check_integrator_config(const IntegratorConfig& cfg, const SpectralGrid& grid, bool has_baths) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be positive");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw std::invalid_argument("horizon must be positive");
  if (cfg.sample_every < 1) throw std::invalid_argument("sample_every must be at least 1");
  if (std::abs(cfg.steps() * cfg.dt - cfg.horizon) > 1e-9 * cfg.horizon)
    throw std::invalid_argument("horizon must be an integer multiple of dt");
  if (cfg.steps() % cfg.sample_every != 0)
    throw std::invalid_argument("the step count must be a multiple of sample_every");
  if (has_baths) {
    const double limit = 0.5 * recurrence_horizon(grid);
    if (cfg.horizon > limit * (1.0 + 1e-12))
      throw GuardViolation(fmt::format("horizon {:g} exceeds half the bath recurrence time ({:g})", cfg.horizon, limit));
    if (cfg.scheme == IntegratorConfig::Scheme::rk4_reference && !(cfg.dt * grid.nu_max < 2.0))
      throw GuardViolation("rk4 reference scheme needs dt * nu_max < 2");
  }
}

std::vector<double> Trajectory::coordinate(std::size_t vertex) const {
  std::vector<double> out(samples());
  for (std::size_t i = 0; i < samples(); ++i) out[i] = q[i][vertex];
  return out;
}

namespace {

void record(const CoupledSystem& sys, const FullState& s, Trajectory& traj) {
  traj.times.push_back(s.t);
  traj.q.push_back(s.q);
  traj.p.push_back(s.p);
  traj.energy.push_back(total_energy(sys, s));
  std::vector<double> e(sys.baths());
  std::vector<double> phi(sys.baths());
  for (std::size_t m = 0; m < sys.baths(); ++m) {
    e[m] = bath_energy(s.baths[m], sys.grid());
    phi[m] = sys.phi(m, s.baths[m]);
  }
  traj.bath_energy.push_back(std::move(e));
  traj.phi.push_back(std::move(phi));
}

template <class Stepper>
Trajectory run(const CoupledSystem& sys, FullState state, const IntegratorConfig& cfg, const Stepper& stepper,
               FullState& final_state) {
  Trajectory traj;
  traj.vertex_ids = sys.network().vertex_ids;
  for (std::size_t m = 0; m < sys.baths(); ++m) traj.bath_vertices.push_back(sys.bath_vertex(m));
  traj.sample_dt = cfg.sample_dt();
  traj.recurrence_horizon =
      sys.baths() > 0 ? recurrence_horizon(sys.grid()) : std::numeric_limits<double>::infinity();
  const long steps = cfg.steps();
  const double t0 = state.t;
  traj.times.reserve(static_cast<std::size_t>(steps / cfg.sample_every + 1));
  record(sys, state, traj);
  const double e0 = traj.energy.front();
  const double scale = std::max(1.0, std::abs(e0));
  for (long n = 1; n <= steps; ++n) {
    stepper.step(state);
    if (n % cfg.sample_every == 0) {
      state.t = t0 + static_cast<double>(n) * cfg.dt;
      if (!state.finite()) throw NumericalFailure(fmt::format("non-finite state at t = {:g}", state.t));
      record(sys, state, traj);
      const double drift = std::abs(traj.energy.back() - e0) / scale;
      if (!(drift <= cfg.max_relative_drift))
        throw NumericalFailure(fmt::format("relative energy drift {:.3g} at t = {:g} exceeds bound {:.3g}", drift,
                                           state.t, cfg.max_relative_drift));
    }
  }
  final_state = std::move(state);
  return traj;
}

}  // namespace

Trajectory simulate(const CoupledSystem& sys, const FullState& init, const IntegratorConfig& cfg,
                    FullState& final_state) {
  check_integrator_config(cfg, sys.grid(), sys.baths() > 0);
  if (init.q.size() != sys.vertices() || init.p.size() != sys.vertices() || init.baths.size() != sys.baths())
    throw std::invalid_argument("initial state does not match the system");
  for (const auto& b : init.baths)
    if (b.xi.size() != sys.modes() || b.xidot.size() != sys.modes())
      throw std::invalid_argument("bath state does not match the grid");
  if (!init.finite()) throw NumericalFailure("initial state is not finite");
  if (cfg.scheme == IntegratorConfig::Scheme::rk4_reference)
    return run(sys, init, cfg, Rk4Stepper(sys, cfg.dt), final_state);
  return run(sys, init, cfg, StrangStepper(sys, cfg.dt), final_state);
}

Trajectory simulate(const CoupledSystem& sys, const FullState& init, const IntegratorConfig& cfg) {
  FullState final_state;
  return simulate(sys, init, cfg, final_state);
}

DerivativeSeries derivative_series(const Trajectory& traj) {
  const std::size_t n = traj.samples();
  if (n < 5) throw std::invalid_argument("derivative series needs at least 5 samples");
  const double h = traj.sample_dt;
  if (!(h > 0.0)) throw std::invalid_argument("trajectory has no sample spacing");
  const std::size_t nv = traj.vertices();
  DerivativeSeries d;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d.times.push_back(traj.times[i]);
    std::vector<double> f1(nv), f2(nv), f3(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      const double qm2 = traj.q[i - 2][j], qm1 = traj.q[i - 1][j], q0 = traj.q[i][j];
      const double qp1 = traj.q[i + 1][j], qp2 = traj.q[i + 2][j];
      f1[j] = (qp1 - qm1) / (2.0 * h);
      f2[j] = (qp1 - 2.0 * q0 + qm1) / (h * h);
      f3[j] = (qp2 - 2.0 * qp1 + 2.0 * qm1 - qm2) / (2.0 * h * h * h);
    }
    d.first.push_back(std::move(f1));
    d.second.push_back(std::move(f2));
    d.third.push_back(std::move(f3));
  }
  return d;
}

double relative_energy_drift(const Trajectory& traj) {
  if (traj.energy.empty()) return 0.0;
  const double e0 = traj.energy.front();
  double worst = 0.0;
  for (double e : traj.energy) worst = std::max(worst, std::abs(e - e0));
  return worst / std::max(1.0, std::abs(e0));
}

}  // namespace heatbath
