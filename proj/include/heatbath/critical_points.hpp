#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heatbath/network.hpp"

namespace heatbath {

struct CriticalPoint {
  Eigen::VectorXd q;
  int morse_index = 0;  // number of negative Hessian eigenvalues
  double min_abs_eigenvalue = 0.0;
  double gradient_norm = 0.0;
};

struct CriticalSearchOptions {
  double box = 5.0;             // starts drawn from [-box, box]^N
  int starts_per_dimension = 64;
  double tolerance = 1e-10;     // gradient norm accepted as critical
  double dedup_tol = 1e-6;
  int max_iterations = 400;
  double degenerate_eigenvalue = 1e-8;  // min |eig| below this flags a non-isolated candidate
  std::uint64_t seed = 0;       // Sobol points skipped before the first start
};

struct CriticalSet {
  std::vector<CriticalPoint> points;
  double box = 0.0;
  double dedup_tol = 0.0;
  int starts = 0;
  int failed_starts = 0;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  /// Any point whose Hessian has an eigenvalue below the degeneracy threshold.
  bool has_degenerate(double threshold) const;
};

/// Damped Newton from Sobol starts in the search box. Points are sorted lexicographically.
CriticalSet find_critical_points(const NetworkSpec& net, std::span<const double> K,
                                 const CriticalSearchOptions& options = {});

/// (distance, index of the nearest point); ties go to the lowest index. Throws on an empty set.
std::pair<double, std::size_t> dist_to_critical_set(std::span<const double> q, const CriticalSet& set);

/// One row per point: coordinates, Morse index, min |eig|.
void write_critical_csv(std::ostream& out, const CriticalSet& set);

}  // namespace heatbath
