#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "heatbath/network.hpp"

using namespace heatbath;

namespace {

const double kSqrtPi = std::sqrt(std::acos(-1.0));

NetworkSpec chain(int n, const Potential& pin, const Potential& spring) {
  NetworkSpec net;
  for (int i = 1; i <= n; ++i) net.vertex_ids.push_back(i);
  net.pins.assign(static_cast<std::size_t>(n), pin);
  for (int i = 0; i + 1 < n; ++i) net.edges.push_back({std::size_t(i), std::size_t(i + 1), spring});
  return net;
}

NetworkSpec quartic_single() {
  NetworkSpec net;
  net.vertex_ids = {1};
  net.pins = {Potential::polynomial({0, 0, 0.5, 0, 0.25})};
  net.baths = {{0, CouplingSpec::gauss(1.0, 1.0)}};
  return net;
}

/// Random connected-ish graph on n vertices for property checks.
std::vector<std::vector<std::size_t>> random_graph(std::size_t n, std::mt19937& rng) {
  std::vector<std::vector<std::size_t>> adj(n);
  std::bernoulli_distribution edge(0.3);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) adj[i].push_back(j), adj[j].push_back(i);
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

VertexSet random_subset(std::size_t n, std::mt19937& rng, double p) {
  std::bernoulli_distribution pick(p);
  VertexSet s;
  for (std::size_t i = 0; i < n; ++i)
    if (pick(rng)) s.push_back(i);
  return s;
}

bool subset(const VertexSet& a, const VertexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

}  // namespace

TEST_CASE("potential evaluates polynomial and derivatives") {
  const Potential u = Potential::polynomial({1.0, -2.0, 0.5, 0.0, 0.25});
  for (double x : {-1.7, 0.0, 0.3, 2.5}) {
    CHECK(u.value(x) == doctest::Approx(1 - 2 * x + 0.5 * x * x + 0.25 * std::pow(x, 4)));
    CHECK(u.first_derivative(x) == doctest::Approx(-2 + x + std::pow(x, 3)));
    CHECK(u.second_derivative(x) == doctest::Approx(1 + 3 * x * x));
  }
  const Potential h = Potential::harmonic(3.0);
  CHECK(h.kind() == Potential::Kind::harmonic);
  CHECK(h.value(2.0) == doctest::Approx(6.0));
  CHECK(h.second_derivative(-5.0) == doctest::Approx(3.0));
  CHECK(h.stiffness() == doctest::Approx(3.0));
  CHECK(Potential::polynomial({0.0, 1.0}).second_derivative_vanishes());
  CHECK_FALSE(Potential::polynomial({0.0, 1.0, 0.0, 1.0}).second_derivative_vanishes());
  CHECK(Potential::polynomial({}).value(3.0) == 0.0);
}

TEST_CASE("network validation rejects malformed graphs") {
  NetworkSpec net = chain(3, Potential::harmonic(1.0), Potential::harmonic(1.0));
  CHECK_NOTHROW(net.validate());

  NetworkSpec loop = net;
  loop.edges.push_back({1, 1, Potential::harmonic(1.0)});
  CHECK_THROWS_AS(loop.validate(), std::invalid_argument);

  NetworkSpec dup = net;
  dup.edges.push_back({0, 1, Potential::harmonic(2.0)});
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

  NetworkSpec missing = net;
  missing.edges.push_back({0, 7, Potential::harmonic(2.0)});
  CHECK_THROWS_AS(missing.validate(), std::invalid_argument);

  NetworkSpec two = net;
  two.baths = {{0, CouplingSpec::gauss(1, 1)}, {0, CouplingSpec::gauss(1, 1)}};
  CHECK_THROWS_AS(two.validate(), std::invalid_argument);
  two.allow_shared_baths = true;
  CHECK_NOTHROW(two.validate());

  NetworkSpec stray = net;
  stray.baths = {{5, CouplingSpec::gauss(1, 1)}};
  CHECK_THROWS_AS(stray.validate(), std::invalid_argument);
}

TEST_CASE("controllability closure: hand traces") {
  NetworkSpec c3 = chain(3, Potential::harmonic(1), Potential::harmonic(1));
  const auto adj = c3.adjacency();
  CHECK(controllability_closure(adj, {0, 2}) == VertexSet{0, 1, 2});
  CHECK(controllability_closure(adj, {1}) == VertexSet{1});
  CHECK(controllability_closure(adj, {0, 1, 2}) == VertexSet{0, 1, 2});
  CHECK(controllability_closure(adj, {0}) == VertexSet{0, 1, 2});  // the chain unrolls from one end

  // Star: centre 0, leaves 1..3.
  std::vector<std::vector<std::size_t>> star{{1, 2, 3}, {0}, {0}, {0}};
  CHECK(controllability_closure(star, {1, 2, 3}) == VertexSet{0, 1, 2, 3});
  CHECK(controllability_closure(star, {1}) == VertexSet{0, 1});  // centre then has two outside neighbours

  c3.baths = {{0, CouplingSpec::gauss(1, 1)}, {2, CouplingSpec::gauss(1, 1)}};
  CHECK(controllability_closure(c3) == VertexSet{0, 1, 2});
}

TEST_CASE("controllability closure is monotone, idempotent and relabel-invariant") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    const auto adj = random_graph(n, rng);
    VertexSet a = random_subset(n, rng, 0.3);
    VertexSet b = a;
    for (std::size_t v : random_subset(n, rng, 0.3)) b.push_back(v);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());

    const VertexSet ca = controllability_closure(adj, a);
    const VertexSet cb = controllability_closure(adj, b);
    CHECK(subset(a, ca));
    CHECK(subset(ca, cb));
    CHECK(controllability_closure(adj, ca) == ca);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> padj(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : adj[i]) padj[perm[i]].push_back(perm[j]);
    for (auto& row : padj) std::sort(row.begin(), row.end());
    VertexSet pa;
    for (std::size_t v : a) pa.push_back(perm[v]);
    std::sort(pa.begin(), pa.end());
    VertexSet expected;
    for (std::size_t v : ca) expected.push_back(perm[v]);
    std::sort(expected.begin(), expected.end());
    CHECK(controllability_closure(padj, pa) == expected);
  }
}

TEST_CASE("effective potential: closed-form values") {
  const NetworkSpec net = quartic_single();
  const std::vector<double> K{kSqrtPi};
  const double zero[] = {0.0};
  const double one[] = {1.0};
  CHECK(effective_potential(net, K, zero) == 0.0);
  CHECK(effective_potential(net, K, one) == doctest::Approx(0.5 + 0.25 - kSqrtPi / 2).epsilon(1e-14));
  CHECK(effective_potential(net, K, one) == doctest::Approx(-0.136227).epsilon(1e-5));
  CHECK(grad_effective_potential(net, K, one)[0] == doctest::Approx(2.0 - kSqrtPi).epsilon(1e-14));
  CHECK(grad_effective_potential(net, K, one)[0] == doctest::Approx(0.227546).epsilon(1e-5));
  CHECK(hess_effective_potential(net, K, zero)(0, 0) == doctest::Approx(1.0 - kSqrtPi).epsilon(1e-14));

  NetworkSpec pair;
  pair.vertex_ids = {1, 2};
  pair.pins.assign(2, Potential::polynomial({}));
  pair.edges = {{0, 1, Potential::harmonic(1.0)}};
  const double q[] = {1.0, -1.0};
  CHECK(effective_potential(pair, {}, q) == doctest::Approx(2.0));
}

TEST_CASE("gradient and Hessian match finite differences") {
  NetworkSpec net = chain(4, Potential::polynomial({0.1, -0.2, 0.75, 0.05, 0.25}),
                          Potential::polynomial({0, 0.1, 0.4, 0.02, 0.1}));
  net.edges.push_back({0, 3, Potential::harmonic(0.3)});
  net.baths = {{0, CouplingSpec::gauss(1, 1)}, {2, CouplingSpec::gauss(0.7, 1.3)}};
  const std::vector<double> K{1.3, 0.8};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q(4);
    for (auto& x : q) x = u(rng);
    const Eigen::VectorXd g = grad_effective_potential(net, K, q);
    const Eigen::MatrixXd H = hess_effective_potential(net, K, q);
    CHECK((H - H.transpose()).norm() == 0.0);
    Eigen::VectorXd fd(4);
    Eigen::MatrixXd fdh(4, 4);
    for (int j = 0; j < 4; ++j) {
      auto qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      fd[j] = (effective_potential(net, K, qp) - effective_potential(net, K, qm)) / (2 * h);
      fdh.col(j) = (grad_effective_potential(net, K, qp) - grad_effective_potential(net, K, qm)) / (2 * h);
    }
    CHECK((fd - g).norm() / std::max(1.0, g.norm()) < 1e-6);
    CHECK((fdh - H).norm() / std::max(1.0, H.norm()) < 1e-5);
  }
}

TEST_CASE("Hessian of a harmonic chain does not depend on q") {
  NetworkSpec net = chain(5, Potential::harmonic(1.0), Potential::harmonic(0.5));
  net.baths = {{0, CouplingSpec::gauss(1, 1)}};
  const std::vector<double> K{0.4};
  const std::vector<double> a{0, 0, 0, 0, 0}, b{1, -2, 3, 0.5, 7};
  const Eigen::MatrixXd Ha = hess_effective_potential(net, K, a);
  CHECK((Ha - hess_effective_potential(net, K, b)).norm() == 0.0);
  CHECK(Ha(0, 0) == doctest::Approx(1.0 + 0.5 - 0.4));
  CHECK(Ha(2, 2) == doctest::Approx(2.0));
  CHECK(Ha(1, 2) == doctest::Approx(-0.5));
  CHECK(Ha(0, 2) == 0.0);
}

TEST_CASE("effective potential is invariant under relabelling") {
  NetworkSpec net = chain(4, Potential::polynomial({0, 0.3, 0.5, 0, 0.25}), Potential::polynomial({0, 0.2, 0.5, 0.1}));
  net.baths = {{1, CouplingSpec::gauss(1, 1)}, {3, CouplingSpec::gauss(1, 1)}};
  const std::vector<double> K{1.1, 0.6};
  const std::vector<double> q{0.4, -0.9, 1.3, 0.2};

  // Reverse the vertex order. Edge a < b must stay ordered, so the argument flips sign and the
  // interaction polynomial is mirrored.
  const std::vector<std::size_t> perm{3, 2, 1, 0};
  NetworkSpec r;
  r.vertex_ids = {4, 3, 2, 1};
  r.pins.resize(4);
  for (std::size_t j = 0; j < 4; ++j) r.pins[perm[j]] = net.pins[j];
  for (const auto& e : net.edges) {
    auto c = e.potential.coefficients();
    for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
    r.edges.push_back({perm[e.b], perm[e.a], Potential::polynomial(c)});
  }
  for (const auto& b : net.baths) r.baths.push_back({perm[b.vertex], b.coupling});
  std::vector<double> rq(4);
  for (std::size_t j = 0; j < 4; ++j) rq[perm[j]] = q[j];
  CHECK(effective_potential(r, K, rq) == doctest::Approx(effective_potential(net, K, q)).epsilon(1e-14));
}

TEST_CASE("without thermostats the effective potential is the mechanical potential") {
  const NetworkSpec net = chain(3, Potential::polynomial({0.5, 0, 1, 0, 0.2}), Potential::harmonic(2.0));
  const std::vector<double> q{0.3, -1.0, 2.0};
  CHECK(effective_potential(net, {}, q) == network_potential(net, q));
  std::vector<double> f(3);
  network_force(net, q, f);
  const Eigen::VectorXd g = grad_effective_potential(net, {}, q);
  for (int j = 0; j < 3; ++j) CHECK(f[std::size_t(j)] == doctest::Approx(-g[j]));
}

TEST_CASE("assumption checks on the reference networks") {
  NetworkSpec c3 = chain(3, Potential::polynomial({0, 0, 0.75, 0, 0.25}), Potential::harmonic(0.25));
  c3.baths = {{0, CouplingSpec::gauss(1, 1)}, {2, CouplingSpec::gauss(1, 1)}};
  const std::vector<double> K2{kSqrtPi, kSqrtPi};
  AssumptionOptions fast;
  fast.starts_per_dimension = 16;
  const AssumptionReport ok = validate_assumptions(c3, K2, fast);
  CHECK(ok.a1.ok());
  CHECK(ok.a5.ok());
  CHECK(ok.lambda_closure == VertexSet{0, 1, 2});

  NetworkSpec mid = c3;
  mid.baths = {{1, CouplingSpec::gauss(1, 1)}};
  const AssumptionReport bad = validate_assumptions(mid, std::vector<double>{kSqrtPi}, fast);
  CHECK(bad.a5.status == CheckStatus::failed);
  CHECK(bad.lambda_closure == VertexSet{1});
  CHECK(bad.a5.diagnostic.find("1, 3") != std::string::npos);

  const AssumptionReport single = validate_assumptions(quartic_single(), std::vector<double>{kSqrtPi});
  CHECK(single.a3.ok());
  CHECK(single.a6.ok());
  CHECK(single.a6.diagnostic.find("3 non-degenerate") != std::string::npos);
  REQUIRE(single.coercivity_samples.size() == 6);
  for (std::size_t i = 1; i < single.coercivity_samples.size(); ++i)
    CHECK(single.coercivity_samples[i].second > single.coercivity_samples[i - 1].second);

  NetworkSpec linear = c3;
  linear.edges[0].potential = Potential::polynomial({0, 1.0});
  CHECK(validate_assumptions(linear, K2, fast).a1.status == CheckStatus::failed);

  // A free pair is flat along the diagonal, so V_eff is not coercive there.
  NetworkSpec pair;
  pair.vertex_ids = {1, 2};
  pair.pins.assign(2, Potential::polynomial({}));
  pair.edges = {{0, 1, Potential::harmonic(1.0)}};
  CHECK(validate_assumptions(pair, {}, fast).a3.status == CheckStatus::inconclusive);
}
