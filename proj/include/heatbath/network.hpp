#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heatbath/potential.hpp"
#include "heatbath/thermostat.hpp"

namespace heatbath {

/// Sorted vertex indices (positions in NetworkSpec::vertex_ids, not the ids themselves).
using VertexSet = std::vector<std::size_t>;

/// Undirected edge between vertex indices a < b. The potential is evaluated at q[a] - q[b].
struct EdgeSpec {
  std::size_t a = 0;
  std::size_t b = 0;
  Potential potential;
};

/// One thermostat attached to a vertex.
struct BathCoupling {
  std::size_t vertex = 0;
  CouplingSpec coupling;
};

struct NetworkSpec {
  std::vector<int> vertex_ids;
  std::vector<Potential> pins;
  std::vector<EdgeSpec> edges;
  std::vector<BathCoupling> baths;
  /// Several thermostats on one vertex; only used for the one-oscillator/two-bath study.
  bool allow_shared_baths = false;

  std::size_t size() const { return vertex_ids.size(); }
  std::size_t index_of(int id) const;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  /// The coupled set Lambda.
  VertexSet coupled() const;
  std::vector<std::vector<std::size_t>> adjacency() const;
};

/// Closure of `start` under "add the unique outside neighbour of every member that has exactly one".
VertexSet controllability_closure(const std::vector<std::vector<std::size_t>>& adjacency, VertexSet start);
VertexSet controllability_closure(const NetworkSpec& net);

/// One K per entry of net.baths.
double effective_potential(const NetworkSpec& net, std::span<const double> K, std::span<const double> q);
Eigen::VectorXd grad_effective_potential(const NetworkSpec& net, std::span<const double> K, std::span<const double> q);
Eigen::MatrixXd hess_effective_potential(const NetworkSpec& net, std::span<const double> K, std::span<const double> q);

/// Plain mechanical potential sum_j U_j + sum_edges V_e.
double network_potential(const NetworkSpec& net, std::span<const double> q);
/// -dV/dq of the plain network potential, written into `force`.
void network_force(const NetworkSpec& net, std::span<const double> q, std::span<double> force);

enum class CheckStatus { ok, failed, inconclusive };
std::string to_string(CheckStatus status);

struct AssumptionCheck {
  CheckStatus status = CheckStatus::inconclusive;
  std::string diagnostic;
  bool ok() const { return status == CheckStatus::ok; }
};

struct AssumptionOptions {
  std::vector<double> radii{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  int directions = 256;
  double box = 5.0;
  int starts_per_dimension = 64;
  double separation_tol = 1e-6;
  std::uint64_t seed = 0;
};

/// A3 and A6 are sampling heuristics and never report `failed`.
struct AssumptionReport {
  AssumptionCheck a1;
  AssumptionCheck a3;
  AssumptionCheck a5;
  AssumptionCheck a6;
  VertexSet lambda_closure;
  std::vector<std::pair<double, double>> coercivity_samples;  // (radius, min |V_eff| on the sphere)
};

AssumptionReport validate_assumptions(const NetworkSpec& net, std::span<const double> K,
                                      const AssumptionOptions& options = {});

}  // namespace heatbath
