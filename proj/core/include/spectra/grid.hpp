#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace spectra {

struct Scenario;

/// Discrete power levels for one tone, one ascending list per user.
/// Every list contains 0 and the user's box maximum for that tone, so
/// "everything off" and "full power" are always representable.
struct PowerGrid {
  std::vector<std::vector<double>> levels;  // [user][level], ascending, mW

  int n_users() const { return static_cast<int>(levels.size()); }

  /// Number of points in the full cartesian product.
  std::uint64_t combinations() const;

  /// {0} plus a geometric ladder from max*10^(-floor_db/10) up to max in
  /// step_db steps. A zero box maximum collapses to the single level {0}.
  static PowerGrid ladder(const Eigen::VectorXd& box_max_mw,
                          double floor_db = 60.0, double step_db = 1.0);
};

/// Grid shape knobs shared by solvers and oracle.
struct GridSpec {
  double floor_db = 60.0;
  double step_db = 1.0;
};

/// One ladder grid per tone, built from the scenario's per-tone box.
std::vector<PowerGrid> make_grids(const Scenario& sc, const GridSpec& spec);

/// Odometer over the cartesian product of grid levels in ascending
/// lexicographic order (user 0 most significant). Returns false once
/// exhausted. `idx` must start as all zeros with `first = true`.
bool next_grid_point(const PowerGrid& grid, std::vector<int>& idx, bool first);

/// Power vector at the given level indices.
Eigen::VectorXd grid_point(const PowerGrid& grid, const std::vector<int>& idx);

}  // namespace spectra
