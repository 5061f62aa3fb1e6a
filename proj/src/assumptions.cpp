#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/random/sobol.hpp>
#include <fmt/format.h>

#include "heatbath/critical_points.hpp"
#include "heatbath/network.hpp"

namespace heatbath {

namespace {

AssumptionCheck check_a1(const NetworkSpec& net) {
  for (const auto& e : net.edges) {
    if (e.potential.second_derivative_vanishes())
      return {CheckStatus::failed, fmt::format("edge {}-{}: V'' vanishes identically", net.vertex_ids[e.a],
                                               net.vertex_ids[e.b])};
  }
  return {CheckStatus::ok, "polynomial potentials; every edge has a non-zero second derivative"};
}

// Minimum of |V_eff| over quasi-random points of each sphere. Coercivity is not decidable from
// samples, so a clean increasing trend is reported ok and anything else inconclusive.
AssumptionCheck check_a3(const NetworkSpec& net, std::span<const double> K, const AssumptionOptions& opt,
                         std::vector<std::pair<double, double>>& samples) {
  const std::size_t n = net.size();
  std::vector<Eigen::VectorXd> directions;
  for (std::size_t j = 0; j < n; ++j) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      d[static_cast<Eigen::Index>(j)] = sign;
      directions.push_back(d);
    }
  }
  // The diagonal catches translation-invariant networks, which are flat along it.
  for (double sign : {1.0, -1.0})
    directions.push_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), sign / std::sqrt(double(n))));
  boost::random::sobol qrng(n);
  const double scale = std::ldexp(1.0, -64);
  for (int s = 0; s < opt.directions; ++s) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) d[static_cast<Eigen::Index>(j)] = 2.0 * static_cast<double>(qrng()) * scale - 1.0;
    if (d.norm() < 1e-3) continue;
    directions.push_back(d / d.norm());
  }
  samples.clear();
  for (double r : opt.radii) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& d : directions) {
      const Eigen::VectorXd q = r * d;
      lowest = std::min(lowest, std::abs(effective_potential(net, K, {q.data(), n})));
    }
    samples.emplace_back(r, lowest);
  }
  const std::size_t m = samples.size();
  bool increasing = m >= 3;
  for (std::size_t i = m >= 3 ? m - 3 : 0; i + 1 < m; ++i) increasing = increasing && samples[i + 1].second > samples[i].second;
  if (increasing)
    return {CheckStatus::ok, fmt::format("sampled min |V_eff| grows to {:.3g} at radius {:g} (heuristic)",
                                         samples.back().second, samples.back().first)};
  return {CheckStatus::inconclusive, "sampled min |V_eff| is not increasing over the outer radii (heuristic)"};
}

AssumptionCheck check_a5(const NetworkSpec& net, const VertexSet& closure) {
  if (closure.size() == net.size()) return {CheckStatus::ok, "controllability closure covers every vertex"};
  std::string missing;
  for (std::size_t j = 0, c = 0; j < net.size(); ++j) {
    if (c < closure.size() && closure[c] == j) {
      ++c;
      continue;
    }
    missing += (missing.empty() ? "" : ", ") + std::to_string(net.vertex_ids[j]);
  }
  return {CheckStatus::failed, "closure misses vertices {" + missing + "}"};
}

AssumptionCheck check_a6(const NetworkSpec& net, std::span<const double> K, const AssumptionOptions& opt) {
  CriticalSearchOptions copt;
  copt.box = opt.box;
  copt.starts_per_dimension = opt.starts_per_dimension;
  copt.dedup_tol = opt.separation_tol;
  copt.seed = opt.seed;
  const CriticalSet cs = find_critical_points(net, K, copt);
  if (cs.empty()) return {CheckStatus::inconclusive, "no critical point found in the search box (heuristic)"};
  if (cs.has_degenerate(copt.degenerate_eigenvalue))
    return {CheckStatus::inconclusive,
            fmt::format("{} critical points, at least one with a degenerate Hessian (heuristic)", cs.size())};
  return {CheckStatus::ok, fmt::format("{} non-degenerate critical points in [-{:g}, {:g}]^N (heuristic)", cs.size(),
                                       opt.box, opt.box)};
}

}  // namespace

AssumptionReport validate_assumptions(const NetworkSpec& net, std::span<const double> K,
                                      const AssumptionOptions& options) {
  net.validate();
  AssumptionReport report;
  report.a1 = check_a1(net);
  report.a3 = check_a3(net, K, options, report.coercivity_samples);
  report.lambda_closure = controllability_closure(net);
  report.a5 = check_a5(net, report.lambda_closure);
  report.a6 = check_a6(net, K, options);
  return report;
}

}  // namespace heatbath
