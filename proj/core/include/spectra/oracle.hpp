#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "spectra/grid.hpp"
#include "spectra/model.hpp"

namespace spectra {

/// Best feasible joint allocation found by exhaustive enumeration.
struct OracleResult {
  double best_value = 0.0;
  SpectrumAllocation best_alloc;
  std::uint64_t enumerated = 0;
};

/// Enumerate every joint grid allocation over all tones (ascending
/// lexicographic, tone 0 then user 0 most significant), keep the best
/// budget-feasible one. Ties resolve to the lexicographically smallest
/// allocation. Refuses outright when the product of grid sizes exceeds
/// `cap` — never silently truncates.
OracleResult brute_force_cwrs(const Scenario& sc,
                              const std::vector<PowerGrid>& grids,
                              std::uint64_t cap = 10'000'000);

/// Analytic single-user reference: bisection on the water level so the
/// clipped per-tone powers meet the budget (or every tone saturates its
/// box). Requires N = 1.
SpectrumAllocation waterfilling_1user(const Scenario& sc);

/// Per-coordinate central differences (f(x+h) − f(x−h)) / 2h.
Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& point, double step);

}  // namespace spectra
