#include "heatbath/io.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace heatbath {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, std::size_t row) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw std::runtime_error(fmt::format("trajectory row {}: bad number '{}'", row, cell));
  return value;
}

nlohmann::json check_json(const AssumptionCheck& c) {
  return {{"status", to_string(c.status)}, {"diagnostic", c.diagnostic}};
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t nv = traj.vertices();
  const std::size_t nb = traj.baths();
  out << 't';
  for (int id : traj.vertex_ids) out << ",q_" << id;
  for (int id : traj.vertex_ids) out << ",p_" << id;
  out << ",E";
  for (std::size_t m = 1; m <= nb; ++m) out << ",E_" << m;
  for (std::size_t m = 1; m <= nb; ++m) out << ",phi_" << m;
  out << '\n';
  fmt::memory_buffer row;
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    row.clear();
    fmt::format_to(std::back_inserter(row), "{:.17g}", traj.times[s]);
    for (std::size_t j = 0; j < nv; ++j) fmt::format_to(std::back_inserter(row), ",{:.17g}", traj.q[s][j]);
    for (std::size_t j = 0; j < nv; ++j) fmt::format_to(std::back_inserter(row), ",{:.17g}", traj.p[s][j]);
    fmt::format_to(std::back_inserter(row), ",{:.17g}", traj.energy[s]);
    for (std::size_t m = 0; m < nb; ++m) fmt::format_to(std::back_inserter(row), ",{:.17g}", traj.bath_energy[s][m]);
    for (std::size_t m = 0; m < nb; ++m) fmt::format_to(std::back_inserter(row), ",{:.17g}", traj.phi[s][m]);
    row.push_back('\n');
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory: missing header");
  const auto header = split(line);
  Trajectory traj;
  std::size_t nb = 0;
  std::size_t col = 1;
  if (header.empty() || header[0] != "t") throw std::runtime_error("trajectory: first column must be t");
  for (; col < header.size() && header[col].starts_with("q_"); ++col) {
    const auto name = header[col].substr(2);
    int id = 0;
    const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), id);
    if (ec != std::errc{} || ptr != name.data() + name.size())
      throw std::runtime_error(fmt::format("trajectory: bad column '{}'", header[col]));
    traj.vertex_ids.push_back(id);
  }
  const std::size_t nv = traj.vertex_ids.size();
  for (std::size_t j = 0; j < nv; ++j, ++col)
    if (col >= header.size() || header[col] != fmt::format("p_{}", traj.vertex_ids[j]))
      throw std::runtime_error("trajectory: p columns must mirror q columns");
  if (col >= header.size() || header[col] != "E") throw std::runtime_error("trajectory: missing E column");
  ++col;
  while (col < header.size() && header[col] == fmt::format("E_{}", nb + 1)) ++nb, ++col;
  for (std::size_t m = 1; m <= nb; ++m, ++col)
    if (col >= header.size() || header[col] != fmt::format("phi_{}", m))
      throw std::runtime_error("trajectory: phi columns must mirror E columns");
  if (col != header.size()) throw std::runtime_error(fmt::format("trajectory: unexpected column '{}'", header[col]));

  const std::size_t width = 1 + 2 * nv + 1 + 2 * nb;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width) throw std::runtime_error(fmt::format("trajectory row {}: expected {} cells", row, width));
    std::size_t c = 0;
    traj.times.push_back(parse_double(cells[c++], row));
    auto& q = traj.q.emplace_back(nv);
    for (auto& x : q) x = parse_double(cells[c++], row);
    auto& p = traj.p.emplace_back(nv);
    for (auto& x : p) x = parse_double(cells[c++], row);
    traj.energy.push_back(parse_double(cells[c++], row));
    auto& e = traj.bath_energy.emplace_back(nb);
    for (auto& x : e) x = parse_double(cells[c++], row);
    auto& phi = traj.phi.emplace_back(nb);
    for (auto& x : phi) x = parse_double(cells[c++], row);
  }
  if (traj.samples() >= 2) traj.sample_dt = traj.times[1] - traj.times[0];
  return traj;
}

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json j;
  j["approached_point"] = r.approached_point ? nlohmann::json(*r.approached_point) : nlohmann::json(nullptr);
  j["approached_q"] = r.approached_q;
  j["dist_final"] = r.dist_final;
  j["tail_window"] = {r.tail_start, r.tail_end};
  j["tail_sup_p"] = r.tail_sup_p;
  j["tail_sup_qddot"] = r.tail_sup_qddot;
  j["tail_sup_qdddot"] = r.tail_sup_qdddot;
  j["theta_tail"] = r.theta_tail;
  j["bath_power_tail"] = r.bath_power_tail;
  j["bath_energy_final"] = r.bath_energy_final;
  j["slowest_frequency"] = r.slowest_frequency;
  j["band"] = r.band;
  j["spectral_ratio"] = r.spectral_ratio;
  j["energy_initial"] = r.energy_initial;
  j["energy_sum_limit"] = r.energy_sum_limit;
  j["energy_sum_defect"] = r.energy_sum_defect;
  j["energy_drift"] = r.energy_drift;
  j["monotone_tail"] = r.monotone_tail;
  return j;
}

nlohmann::json to_json(const AssumptionReport& r, const NetworkSpec& net) {
  nlohmann::json closure = nlohmann::json::array();
  for (std::size_t v : r.lambda_closure) closure.push_back(net.vertex_ids[v]);
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [radius, value] : r.coercivity_samples) samples.push_back({{"radius", radius}, {"min_abs_veff", value}});
  return {{"a1", check_json(r.a1)},
          {"a3", check_json(r.a3)},
          {"a5", check_json(r.a5)},
          {"a6", check_json(r.a6)},
          {"lambda_closure", closure},
          {"coercivity_samples", samples}};
}

nlohmann::json to_json(const TwoBathReport& r) {
  return {{"truncation_time", r.truncation_time},
          {"e1_initial", r.e1_initial},
          {"e2_initial", r.e2_initial},
          {"e1_final", r.e1_final},
          {"e2_final", r.e2_final},
          {"energy_sum_limit", r.energy_sum_limit},
          {"energy_sum_defect", r.energy_sum_defect},
          {"defect", r.defect},
          {"predicted_difference_limit", r.defect},
          {"observed_difference", r.observed_difference},
          {"agreement_error", r.agreement_error},
          {"eta_energy_initial", r.eta_energy_initial},
          {"indeterminate", r.indeterminate}};
}

nlohmann::json to_json(const CriticalSet& set) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : set.points)
    points.push_back({{"q", std::vector<double>(p.q.data(), p.q.data() + p.q.size())},
                      {"morse_index", p.morse_index},
                      {"min_abs_eigenvalue", p.min_abs_eigenvalue},
                      {"gradient_norm", p.gradient_norm}});
  return {{"box", set.box}, {"dedup_tol", set.dedup_tol}, {"starts", set.starts},
          {"failed_starts", set.failed_starts}, {"points", points}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace heatbath
