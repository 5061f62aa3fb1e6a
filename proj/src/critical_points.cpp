#include "heatbath/critical_points.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/random/sobol.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace heatbath {

namespace {

struct NewtonResult {
  Eigen::VectorXd q;
  double gradient_norm = 0.0;
  bool converged = false;
};

double grad_norm(const NetworkSpec& net, std::span<const double> K, const Eigen::VectorXd& q) {
  return grad_effective_potential(net, K, {q.data(), static_cast<std::size_t>(q.size())}).norm();
}

NewtonResult newton(const NetworkSpec& net, std::span<const double> K, Eigen::VectorXd q,
                    const CriticalSearchOptions& opt) {
  const auto n = static_cast<std::size_t>(q.size());
  const double step_tol = 1e-3 * opt.dedup_tol;
  NewtonResult res;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd g = grad_effective_potential(net, K, {q.data(), n});
    const double gn = g.norm();
    if (!std::isfinite(gn)) break;
    const Eigen::MatrixXd h = hess_effective_potential(net, K, {q.data(), n});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const double floor = 1e-14 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    Eigen::VectorXd coef = eig.eigenvectors().transpose() * g;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double l = std::abs(lam[i]) < floor ? std::copysign(floor, lam[i] == 0.0 ? 1.0 : lam[i]) : lam[i];
      coef[i] /= l;
    }
    Eigen::VectorXd step = -(eig.eigenvectors() * coef);
    // Backtrack on the gradient norm; near-singular Hessians produce huge steps.
    const double max_step = opt.box;
    if (step.norm() > max_step) step *= max_step / step.norm();
    double alpha = 1.0;
    Eigen::VectorXd trial = q + step;
    double trial_norm = grad_norm(net, K, trial);
    while (!(trial_norm < gn) && alpha > 1e-6) {
      alpha *= 0.5;
      trial = q + alpha * step;
      trial_norm = grad_norm(net, K, trial);
    }
    if (!(trial_norm < gn)) {
      // No decrease along the Newton direction: try steepest descent on |g|^2.
      Eigen::VectorXd d = -(h * g);
      if (d.norm() > 0.0) {
        d *= std::min(1.0, max_step / d.norm());
        alpha = 1.0;
        trial = q + d;
        trial_norm = grad_norm(net, K, trial);
        while (!(trial_norm < gn) && alpha > 1e-10) {
          alpha *= 0.5;
          trial = q + alpha * d;
          trial_norm = grad_norm(net, K, trial);
        }
      }
      if (!(trial_norm < gn)) {
        res.q = q;
        res.gradient_norm = gn;
        res.converged = gn < opt.tolerance;
        return res;
      }
    }
    const double moved = (trial - q).norm();
    q = trial;
    if (q.cwiseAbs().maxCoeff() > 4.0 * opt.box) break;
    if (trial_norm < opt.tolerance && moved < step_tol) {
      res.q = q;
      res.gradient_norm = trial_norm;
      res.converged = true;
      return res;
    }
  }
  res.q = q;
  res.gradient_norm = grad_norm(net, K, q);
  res.converged = std::isfinite(res.gradient_norm) && res.gradient_norm < opt.tolerance &&
                  q.cwiseAbs().maxCoeff() <= 4.0 * opt.box;
  return res;
}

}  // namespace

bool CriticalSet::has_degenerate(double threshold) const {
  return std::any_of(points.begin(), points.end(),
                     [&](const CriticalPoint& p) { return p.min_abs_eigenvalue < threshold; });
}

CriticalSet find_critical_points(const NetworkSpec& net, std::span<const double> K,
                                 const CriticalSearchOptions& options) {
  if (!(options.box > 0.0)) throw std::invalid_argument("search box must be positive");
  if (options.starts_per_dimension < 1) throw std::invalid_argument("need at least one start");
  const std::size_t n = net.size();
  CriticalSet set;
  set.box = options.box;
  set.dedup_tol = options.dedup_tol;
  set.starts = options.starts_per_dimension * static_cast<int>(n);

  boost::random::sobol qrng(n);
  if (options.seed > 0) qrng.discard(options.seed * n);
  const double scale = std::ldexp(1.0, -64);
  for (int s = 0; s < set.starts; ++s) {
    Eigen::VectorXd start(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const double u = static_cast<double>(qrng()) * scale;
      start[static_cast<Eigen::Index>(j)] = options.box * (2.0 * u - 1.0);
    }
    NewtonResult r = newton(net, K, start, options);
    if (!r.converged) {
      ++set.failed_starts;
      continue;
    }
    auto dup = std::find_if(set.points.begin(), set.points.end(),
                            [&](const CriticalPoint& p) { return (p.q - r.q).norm() < options.dedup_tol; });
    if (dup != set.points.end()) {
      if (r.gradient_norm < dup->gradient_norm) {
        dup->q = r.q;
        dup->gradient_norm = r.gradient_norm;
      }
      continue;
    }
    CriticalPoint p;
    p.q = r.q;
    p.gradient_norm = r.gradient_norm;
    set.points.push_back(std::move(p));
  }

  for (auto& p : set.points) {
    const Eigen::MatrixXd h = hess_effective_potential(net, K, {p.q.data(), n});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    p.morse_index = static_cast<int>((lam.array() < 0.0).count());
    p.min_abs_eigenvalue = lam.cwiseAbs().minCoeff();
  }
  std::sort(set.points.begin(), set.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return std::lexicographical_compare(a.q.data(), a.q.data() + a.q.size(), b.q.data(), b.q.data() + b.q.size());
  });
  return set;
}

std::pair<double, std::size_t> dist_to_critical_set(std::span<const double> q, const CriticalSet& set) {
  if (set.empty()) throw std::invalid_argument("critical set is empty");
  double best = std::numeric_limits<double>::infinity();
  std::size_t idx = 0;
  const Eigen::Map<const Eigen::VectorXd> x(q.data(), static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.points[i].q.size() != x.size()) throw std::invalid_argument("dimension mismatch with critical set");
    const double d = (set.points[i].q - x).norm();
    if (d < best) {
      best = d;
      idx = i;
    }
  }
  return {best, idx};
}

void write_critical_csv(std::ostream& out, const CriticalSet& set) {
  const std::size_t n = set.empty() ? 0 : static_cast<std::size_t>(set.points.front().q.size());
  for (std::size_t j = 0; j < n; ++j) out << "q_" << (j + 1) << ',';
  out << "morse_index,min_abs_eigenvalue\n";
  for (const auto& p : set.points) {
    for (Eigen::Index j = 0; j < p.q.size(); ++j) fmt::print(out, "{:.17g},", p.q[j]);
    fmt::print(out, "{},{:.17g}\n", p.morse_index, p.min_abs_eigenvalue);
  }
}

}  // namespace heatbath
