#include "heatbath/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <fftw3.h>

#include "heatbath/errors.hpp"
#include "heatbath/kernel.hpp"

namespace heatbath {

namespace {

// Two-sided power sum over DFT bins of a real series with |lambda_k| > band.
double power_above(const std::vector<double>& x, double sample_dt, double band) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  double power = 0.0;
  const double resolution = 2.0 * M_PI / (n * sample_dt);
  for (int k = 1; k <= n / 2; ++k) {
    if (k * resolution <= band) continue;
    const bool nyquist = (n % 2 == 0) && k == n / 2;
    power += (nyquist ? 1.0 : 2.0) * std::norm(out[static_cast<std::size_t>(k)]);
  }
  return power;
}

double sup_abs_tail(const std::vector<double>& times, double start, auto&& value) {
  double s = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= start) s = std::max(s, std::abs(value(i)));
  return s;
}

}  // namespace

double spectral_diagnostic(std::span<const double> series, double sample_dt, double band) {
  const std::size_t n = series.size();
  if (n < 16) throw std::invalid_argument("spectral diagnostic needs at least 16 samples");
  if (!(sample_dt > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> windowed(n), centred(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)));
    windowed[i] = h * series[i];
    centred[i] = h * (series[i] - mean);
    total += windowed[i] * windowed[i];
  }
  total *= static_cast<double>(n);
  if (total == 0.0) return 0.0;
  return std::clamp(power_above(centred, sample_dt, band) / total, 0.0, 1.0);
}

ConvergenceReport convergence_report(const CoupledSystem& sys, const Trajectory& traj, const CriticalSet& critical,
                                     const ReportOptions& options) {
  if (critical.empty()) throw std::invalid_argument("critical set is empty");
  const std::size_t n = traj.samples();
  if (n < 16) throw std::invalid_argument("trajectory too short for tail diagnostics");
  if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0))
    throw std::invalid_argument("tail fraction must be in (0, 1]");
  const double span = traj.times.back() - traj.times.front();
  if (sys.baths() > 0 && span > 0.5 * traj.recurrence_horizon * (1.0 + 1e-12))
    throw GuardViolation("trajectory runs past half the bath recurrence time");

  const auto& net = sys.network();
  const std::size_t nv = traj.vertices();
  const std::size_t nb = traj.baths();
  ConvergenceReport r;
  r.tail_end = traj.times.back();
  r.tail_start = r.tail_end - options.tail_fraction * span;

  std::vector<double> dist(n);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) std::tie(dist[i], idx) = dist_to_critical_set(traj.q[i], critical);
  r.dist_final = dist.back();
  r.approached_point = idx;
  const auto& qc = critical.points[idx].q;
  r.approached_q.assign(qc.data(), qc.data() + qc.size());

  r.monotone_tail = true;
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (traj.times[i] < r.tail_start) continue;
    if (dist[i] > 1.1 * running_min) r.monotone_tail = false;
    running_min = std::min(running_min, dist[i]);
  }

  for (std::size_t j = 0; j < nv; ++j)
    r.tail_sup_p = std::max(r.tail_sup_p, sup_abs_tail(traj.times, r.tail_start, [&](std::size_t i) { return traj.p[i][j]; }));
  const DerivativeSeries d = derivative_series(traj);
  for (std::size_t j = 0; j < nv; ++j) {
    r.tail_sup_qddot = std::max(r.tail_sup_qddot, sup_abs_tail(d.times, r.tail_start, [&](std::size_t i) { return d.second[i][j]; }));
    r.tail_sup_qdddot = std::max(r.tail_sup_qdddot, sup_abs_tail(d.times, r.tail_start, [&](std::size_t i) { return d.third[i][j]; }));
  }

  const ThetaSeries theta = theta_decomposition(traj, sys.K(), options.tail_fraction);
  r.theta_tail = theta.tail_sup;

  const double h = traj.sample_dt;
  r.bath_power_tail.assign(nb, 0.0);
  r.bath_energy_final.assign(nb, 0.0);
  for (std::size_t m = 0; m < nb; ++m) {
    r.bath_energy_final[m] = traj.bath_energy.back()[m];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (traj.times[i] < r.tail_start) continue;
      const double rate = (traj.bath_energy[i + 1][m] - traj.bath_energy[i - 1][m]) / (2.0 * h);
      r.bath_power_tail[m] = std::max(r.bath_power_tail[m], std::abs(rate));
    }
  }

  // Slowest linearised frequency from the Hessian of V_eff at the approached point.
  const Eigen::MatrixXd hess = hess_effective_potential(net, sys.K(), {qc.data(), static_cast<std::size_t>(qc.size())});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
  double lowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    if (eig.eigenvalues()[i] > 0.0) lowest = std::min(lowest, eig.eigenvalues()[i]);
  if (!std::isfinite(lowest)) lowest = eig.eigenvalues().cwiseAbs().minCoeff();
  r.slowest_frequency = std::sqrt(lowest);
  r.band = options.band_fraction * r.slowest_frequency;

  std::vector<double> tail;
  for (std::size_t v : net.coupled()) {
    tail.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (traj.times[i] >= r.tail_start) tail.push_back(traj.q[i][v]);
    r.spectral_ratio = std::max(r.spectral_ratio, spectral_diagnostic(tail, h, r.band));
  }

  r.energy_initial = traj.energy.front();
  double limit = r.energy_initial - effective_potential(net, sys.K(), {qc.data(), static_cast<std::size_t>(qc.size())});
  for (std::size_t m = 0; m < sys.baths(); ++m) {
    const double x = qc[static_cast<Eigen::Index>(sys.bath_vertex(m))];
    limit += 0.5 * sys.K()[m] * x * x;
  }
  r.energy_sum_limit = limit;
  double sum = 0.0;
  for (double e : r.bath_energy_final) sum += e;
  r.energy_sum_defect = std::abs(sum - limit);
  r.energy_drift = relative_energy_drift(traj);
  return r;
}

}  // namespace heatbath
