#include "heatbath/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "heatbath/errors.hpp"

namespace heatbath {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) { throw ConfigError(what, line_of(node)); }

/// Rejects keys outside `allowed` and returns the node for chaining.
const YAML::Node& expect_map(const YAML::Node& node, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", where));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, where));
  }
  return node;
}

template <class T>
T scalar(const YAML::Node& node, std::string_view what) {
  if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a scalar", what));
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(node, fmt::format("'{}' has the wrong type", what));
  }
}

template <class T>
T scalar_or(const YAML::Node& parent, const char* key, T fallback) {
  const YAML::Node node = parent[key];
  return node ? scalar<T>(node, key) : fallback;
}

template <class T>
T required(const YAML::Node& parent, const char* key, std::string_view where) {
  const YAML::Node node = parent[key];
  if (!node) fail(parent, fmt::format("'{}' needs '{}'", where, key));
  return scalar<T>(node, key);
}

std::vector<double> number_list(const YAML::Node& node, std::string_view what) {
  if (!node.IsSequence()) fail(node, fmt::format("'{}' must be a list", what));
  std::vector<double> out;
  for (const auto& x : node) out.push_back(scalar<double>(x, what));
  return out;
}

/// {harmonic: k} or {polynomial: [c0, c1, ...]}; extra keys in `also` are ignored here.
Potential parse_potential(const YAML::Node& node, std::string_view where,
                          std::initializer_list<std::string_view> also = {}) {
  if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", where));
  std::optional<Potential> out;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(also.begin(), also.end(), key) != also.end()) continue;
    if (out) fail(kv.first, fmt::format("'{}' takes exactly one of harmonic, polynomial", where));
    if (key == "harmonic") {
      out = Potential::harmonic(scalar<double>(kv.second, "harmonic"));
    } else if (key == "polynomial") {
      out = Potential::polynomial(number_list(kv.second, "polynomial"));
    } else {
      fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, where));
    }
  }
  if (!out) fail(node, fmt::format("'{}' needs harmonic or polynomial", where));
  return *out;
}

CouplingSpec parse_coupling(const YAML::Node& node) {
  expect_map(node, "coupling", {"family", "amplitude", "sigma", "power"});
  const auto family = required<std::string>(node, "family", "coupling");
  CouplingSpec c;
  if (family == "gauss") {
    if (node["power"]) fail(node["power"], "gauss coupling has no 'power'");
    c = CouplingSpec::gauss(required<double>(node, "amplitude", "coupling"), scalar_or(node, "sigma", 1.0));
  } else if (family == "rational") {
    if (node["sigma"]) fail(node["sigma"], "rational coupling has no 'sigma'");
    c = CouplingSpec::rational(required<double>(node, "amplitude", "coupling"), scalar_or(node, "power", 2));
  } else {
    fail(node["family"], fmt::format("unknown coupling family '{}'", family));
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(node, e.what());
  }
  return c;
}

BathInitSpec parse_init(const YAML::Node& node) {
  if (!node) return BathInitSpec::zero();
  expect_map(node, "init", {"profile", "b", "c", "s", "q_ref"});
  const auto profile = required<std::string>(node, "profile", "init");
  BathInitSpec spec;
  if (profile == "zero") {
    spec = BathInitSpec::zero();
  } else if (profile == "gauss_packet") {
    spec = BathInitSpec::gauss_packet(scalar_or(node, "b", 0.0), scalar_or(node, "c", 0.0), scalar_or(node, "s", 1.0));
  } else if (profile == "dressed") {
    spec = BathInitSpec::dressed(required<double>(node, "q_ref", "init"));
  } else {
    fail(node["profile"], fmt::format("unknown bath profile '{}'", profile));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    fail(node, e.what());
  }
  return spec;
}

std::size_t vertex_index(const NetworkSpec& net, const YAML::Node& node) {
  const int id = scalar<int>(node, "vertex id");
  const auto it = std::find(net.vertex_ids.begin(), net.vertex_ids.end(), id);
  if (it == net.vertex_ids.end()) fail(node, fmt::format("unknown vertex {}", id));
  return static_cast<std::size_t>(it - net.vertex_ids.begin());
}

/// V(-x): used when an edge is listed from the higher to the lower vertex.
Potential mirrored(const Potential& v) {
  if (v.kind() == Potential::Kind::harmonic) return v;
  std::vector<double> c = v.coefficients();
  for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
  return Potential::polynomial(std::move(c));
}

void parse_network(const YAML::Node& root, Scenario& s) {
  NetworkSpec& net = s.network;
  const YAML::Node vertices = root["vertices"];
  if (!vertices) fail(root, "missing 'vertices'");
  if (!vertices.IsSequence() || vertices.size() == 0) fail(vertices, "'vertices' must be a non-empty list");
  std::set<int> seen;
  for (const auto& v : vertices) {
    const int id = scalar<int>(v, "vertices");
    if (!seen.insert(id).second) fail(v, fmt::format("duplicate vertex id {}", id));
    net.vertex_ids.push_back(id);
  }

  net.pins.assign(net.size(), Potential::polynomial({}));
  if (const YAML::Node pins = root["pins"]) {
    if (!pins.IsMap()) fail(pins, "'pins' must be a mapping");
    if (const YAML::Node d = pins["default"]) net.pins.assign(net.size(), parse_potential(d, "pins.default"));
    for (const auto& kv : pins) {
      if (kv.first.as<std::string>() == "default") continue;
      net.pins[vertex_index(net, kv.first)] = parse_potential(kv.second, "pins");
    }
  }

  if (const YAML::Node edges = root["edges"]) {
    if (!edges.IsSequence()) fail(edges, "'edges' must be a list");
    for (const auto& e : edges) {
      if (!e.IsMap()) fail(e, "edge entries must be mappings");
      const YAML::Node between = e["between"];
      if (!between || !between.IsSequence() || between.size() != 2) fail(e, "edge needs 'between: [i, j]'");
      std::size_t a = vertex_index(net, between[0]);
      std::size_t b = vertex_index(net, between[1]);
      if (a == b) fail(e, "self-loop edge");
      Potential v = parse_potential(e, "edge", {"between"});
      if (a > b) {
        std::swap(a, b);
        v = mirrored(v);
      }
      net.edges.push_back({a, b, std::move(v)});
    }
  }

  net.allow_shared_baths = scalar_or(root, "shared_baths", false);
  if (const YAML::Node baths = root["thermostats"]) {
    if (!baths.IsSequence()) fail(baths, "'thermostats' must be a list");
    for (const auto& t : baths) {
      expect_map(t, "thermostats", {"vertex", "coupling", "init"});
      if (!t["vertex"]) fail(t, "thermostat needs 'vertex'");
      if (!t["coupling"]) fail(t, "thermostat needs 'coupling'");
      net.baths.push_back({vertex_index(net, t["vertex"]), parse_coupling(t["coupling"])});
      s.bath_init.push_back(parse_init(t["init"]));
    }
  }
  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    fail(root, e.what());
  }
}

IntegratorConfig::Scheme parse_scheme(const YAML::Node& node) {
  const auto name = scalar<std::string>(node, "scheme");
  if (name == "strang_exact_bath") return IntegratorConfig::Scheme::strang_exact_bath;
  if (name == "rk4_reference") return IntegratorConfig::Scheme::rk4_reference;
  fail(node, fmt::format("unknown scheme '{}'", name));
}

}  // namespace

AssumptionOptions Scenario::assumption_options() const {
  AssumptionOptions o;
  o.box = critical.box;
  o.starts_per_dimension = critical.starts_per_dimension;
  o.separation_tol = critical.dedup_tol;
  o.seed = critical.seed;
  return o;
}

FullState Scenario::initial_state(const CoupledSystem& sys) const {
  FullState s = make_state(sys, q0, p0, bath_init);
  return backward ? time_reversed(std::move(s)) : s;
}

Scenario parse_scenario_text(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("scenario must be a mapping");
  expect_map(root, "scenario",
             {"name", "vertices", "pins", "edges", "thermostats", "shared_baths", "grid", "initial", "integrator",
              "kernel", "analysis", "output", "expect"});

  Scenario s;
  s.source = std::string(text);
  s.name = required<std::string>(root, "name", "scenario");
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    fail(root["name"], "name must be a non-empty file-name-safe string");
  parse_network(root, s);
  const NetworkSpec& net = s.network;

  double cutoff = net.baths.empty() ? 1.0 : 0.0;  // a bath-free network still carries a nominal grid
  for (const auto& b : net.baths) cutoff = std::max(cutoff, default_cutoff(b.coupling));
  const YAML::Node grid = root["grid"];
  if (grid) expect_map(grid, "grid", {"nu_max", "count"});
  s.nu_max = grid ? scalar_or(grid, "nu_max", cutoff) : cutoff;
  s.grid_count = grid ? scalar_or(grid, "count", 1024) : 1024;
  try {
    build_grid(s.nu_max, s.grid_count);
  } catch (const std::invalid_argument& e) {
    fail(grid ? grid : root, e.what());
  }

  s.q0.assign(net.size(), 0.0);
  s.p0.assign(net.size(), 0.0);
  if (const YAML::Node init = root["initial"]) {
    expect_map(init, "initial", {"q", "p"});
    for (auto [key, target] : {std::pair{"q", &s.q0}, std::pair{"p", &s.p0}}) {
      if (!init[key]) continue;
      *target = number_list(init[key], key);
      if (target->size() != net.size()) fail(init[key], fmt::format("'initial.{}' needs one entry per vertex", key));
    }
  }

  const YAML::Node integ = root["integrator"];
  if (!integ) fail(root, "missing 'integrator'");
  expect_map(integ, "integrator", {"dt", "horizon", "sample_every", "scheme", "max_relative_drift", "direction"});
  IntegratorConfig& cfg = s.integrator;
  cfg.dt = scalar_or(integ, "dt", cfg.dt);
  cfg.horizon = required<double>(integ, "horizon", "integrator");
  cfg.sample_every = scalar_or(integ, "sample_every", cfg.sample_every);
  cfg.max_relative_drift = scalar_or(integ, "max_relative_drift", cfg.max_relative_drift);
  if (integ["scheme"]) cfg.scheme = parse_scheme(integ["scheme"]);
  if (const YAML::Node dir = integ["direction"]) {
    const auto d = scalar<std::string>(dir, "direction");
    if (d != "forward" && d != "backward") fail(dir, "direction must be forward or backward");
    s.backward = d == "backward";
  }
  try {
    check_integrator_config(cfg, s.grid(), !net.baths.empty());
  } catch (const GuardViolation& e) {
    fail(integ["horizon"], fmt::format("recurrence guard: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    fail(integ, e.what());
  }

  if (const YAML::Node k = root["kernel"]) {
    expect_map(k, "kernel", {"tau_max"});
    s.tau_max = scalar_or(k, "tau_max", s.tau_max);
    if (!(s.tau_max > 0.0)) fail(k, "kernel.tau_max must be positive");
  }

  if (const YAML::Node a = root["analysis"]) {
    expect_map(a, "analysis",
               {"tail_fraction", "band_fraction", "truncation", "box", "starts_per_dimension", "dedup_tol",
                "tolerance", "seed"});
    s.report.tail_fraction = scalar_or(a, "tail_fraction", s.report.tail_fraction);
    s.report.band_fraction = scalar_or(a, "band_fraction", s.report.band_fraction);
    s.truncation = scalar_or(a, "truncation", 0.0);
    s.critical.box = scalar_or(a, "box", s.critical.box);
    s.critical.starts_per_dimension = scalar_or(a, "starts_per_dimension", s.critical.starts_per_dimension);
    s.critical.dedup_tol = scalar_or(a, "dedup_tol", s.critical.dedup_tol);
    s.critical.tolerance = scalar_or(a, "tolerance", s.critical.tolerance);
    s.critical.seed = scalar_or<std::uint64_t>(a, "seed", 0);
    if (!(s.report.tail_fraction > 0.0 && s.report.tail_fraction <= 1.0)) fail(a, "tail_fraction must be in (0, 1]");
    if (!(s.report.band_fraction > 0.0)) fail(a, "band_fraction must be positive");
    if (s.truncation < 0.0 || s.truncation > cfg.horizon) fail(a, "truncation must lie in [0, horizon]");
    if (!(s.critical.box > 0.0) || s.critical.starts_per_dimension < 1 || !(s.critical.dedup_tol > 0.0))
      fail(a, "critical-point search needs box > 0, starts_per_dimension >= 1, dedup_tol > 0");
  }
  if (s.truncation == 0.0) s.truncation = cfg.horizon;

  s.output_directory = s.name;
  if (const YAML::Node out = root["output"]) {
    expect_map(out, "output", {"directory"});
    s.output_directory = scalar_or<std::string>(out, "directory", s.name);
  }

  if (const YAML::Node e = root["expect"]) {
    expect_map(e, "expect", {"a5"});
    if (e["a5"]) s.expect_a5 = scalar<bool>(e["a5"], "a5");
  }
  const bool a5 = controllability_closure(net).size() == net.size();
  if (!a5)
    s.warnings.push_back("A5 fails: the controllability closure does not cover every vertex");
  if (s.expect_a5 && *s.expect_a5 != a5)
    s.warnings.push_back(fmt::format("expected a5 = {} but the closure gives {}", *s.expect_a5, a5));
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open scenario '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_text(text.str());
}

}  // namespace heatbath
