#include "heatbath/network.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace heatbath {

std::size_t NetworkSpec::index_of(int id) const {
  auto it = std::find(vertex_ids.begin(), vertex_ids.end(), id);
  if (it == vertex_ids.end()) throw std::invalid_argument(fmt::format("unknown vertex id {}", id));
  return static_cast<std::size_t>(it - vertex_ids.begin());
}

void NetworkSpec::validate() const {
  if (vertex_ids.empty()) throw std::invalid_argument("network has no vertices");
  if (std::set<int>(vertex_ids.begin(), vertex_ids.end()).size() != vertex_ids.size())
    throw std::invalid_argument("duplicate vertex id");
  if (pins.size() != vertex_ids.size()) throw std::invalid_argument("every vertex needs exactly one pinning potential");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.a >= size() || e.b >= size()) throw std::invalid_argument("edge references a missing vertex");
    if (e.a == e.b) throw std::invalid_argument("self-loop edge");
    if (e.a > e.b) throw std::invalid_argument("edge endpoints must be ordered a < b");
    if (!seen.emplace(e.a, e.b).second)
      throw std::invalid_argument(fmt::format("duplicate edge {}-{}", vertex_ids[e.a], vertex_ids[e.b]));
  }
  std::set<std::size_t> coupled_vertices;
  for (const auto& bath : baths) {
    if (bath.vertex >= size()) throw std::invalid_argument("thermostat attached to a missing vertex");
    bath.coupling.validate();
    if (!coupled_vertices.insert(bath.vertex).second && !allow_shared_baths)
      throw std::invalid_argument(
          fmt::format("vertex {} has more than one thermostat", vertex_ids[bath.vertex]));
  }
}

VertexSet NetworkSpec::coupled() const {
  std::set<std::size_t> s;
  for (const auto& bath : baths) s.insert(bath.vertex);
  return {s.begin(), s.end()};
}

std::vector<std::vector<std::size_t>> NetworkSpec::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(size());
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

VertexSet controllability_closure(const std::vector<std::vector<std::size_t>>& adjacency, VertexSet start) {
  std::vector<bool> inside(adjacency.size(), false);
  for (std::size_t v : start) inside.at(v) = true;
  for (;;) {
    // Collect all unique outside neighbours against the current set, then add them at once.
    std::vector<std::size_t> added;
    for (std::size_t j = 0; j < adjacency.size(); ++j) {
      if (!inside[j]) continue;
      std::size_t outside = 0;
      std::size_t candidate = 0;
      for (std::size_t n : adjacency[j]) {
        if (!inside[n]) {
          ++outside;
          candidate = n;
        }
      }
      if (outside == 1) added.push_back(candidate);
    }
    if (added.empty()) break;
    for (std::size_t n : added) inside[n] = true;
  }
  VertexSet out;
  for (std::size_t j = 0; j < inside.size(); ++j)
    if (inside[j]) out.push_back(j);
  return out;
}

VertexSet controllability_closure(const NetworkSpec& net) { return controllability_closure(net.adjacency(), net.coupled()); }

static void check_sizes(const NetworkSpec& net, std::span<const double> K, std::span<const double> q) {
  if (q.size() != net.size()) throw std::invalid_argument("q must have one entry per vertex");
  if (K.size() != net.baths.size()) throw std::invalid_argument("K must have one entry per thermostat");
}

double network_potential(const NetworkSpec& net, std::span<const double> q) {
  double v = 0.0;
  for (std::size_t j = 0; j < net.size(); ++j) v += net.pins[j].value(q[j]);
  for (const auto& e : net.edges) v += e.potential.value(q[e.a] - q[e.b]);
  return v;
}

void network_force(const NetworkSpec& net, std::span<const double> q, std::span<double> force) {
  for (std::size_t j = 0; j < net.size(); ++j) force[j] = -net.pins[j].first_derivative(q[j]);
  for (const auto& e : net.edges) {
    const double d = e.potential.first_derivative(q[e.a] - q[e.b]);
    force[e.a] -= d;
    force[e.b] += d;
  }
}

double effective_potential(const NetworkSpec& net, std::span<const double> K, std::span<const double> q) {
  check_sizes(net, K, q);
  double v = network_potential(net, q);
  for (std::size_t m = 0; m < net.baths.size(); ++m) {
    const double qm = q[net.baths[m].vertex];
    v -= 0.5 * K[m] * qm * qm;
  }
  return v;
}

Eigen::VectorXd grad_effective_potential(const NetworkSpec& net, std::span<const double> K, std::span<const double> q) {
  check_sizes(net, K, q);
  Eigen::VectorXd g(static_cast<Eigen::Index>(net.size()));
  network_force(net, q, std::span<double>(g.data(), net.size()));
  g = -g;
  for (std::size_t m = 0; m < net.baths.size(); ++m) {
    const std::size_t v = net.baths[m].vertex;
    g[static_cast<Eigen::Index>(v)] -= K[m] * q[v];
  }
  return g;
}

Eigen::MatrixXd hess_effective_potential(const NetworkSpec& net, std::span<const double> K, std::span<const double> q) {
  check_sizes(net, K, q);
  const auto n = static_cast<Eigen::Index>(net.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < net.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    h(jj, jj) += net.pins[j].second_derivative(q[j]);
  }
  for (const auto& e : net.edges) {
    const double d2 = e.potential.second_derivative(q[e.a] - q[e.b]);
    const auto a = static_cast<Eigen::Index>(e.a);
    const auto b = static_cast<Eigen::Index>(e.b);
    h(a, a) += d2;
    h(b, b) += d2;
    h(a, b) -= d2;
    h(b, a) -= d2;
  }
  for (std::size_t m = 0; m < net.baths.size(); ++m) {
    const auto v = static_cast<Eigen::Index>(net.baths[m].vertex);
    h(v, v) -= K[m];
  }
  return h;
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::ok:
      return "ok";
    case CheckStatus::failed:
      return "failed";
    case CheckStatus::inconclusive:
      return "inconclusive";
  }
  return {};
}

}  // namespace heatbath
