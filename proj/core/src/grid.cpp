#include "spectra/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "spectra/model.hpp"
#include "spectra/units.hpp"

namespace spectra {

std::uint64_t PowerGrid::combinations() const {
  std::uint64_t total = 1;
  for (const auto& lv : levels) {
    const auto n = static_cast<std::uint64_t>(lv.size());
    if (n == 0) throw std::invalid_argument("PowerGrid: empty level list");
    if (total > UINT64_MAX / n) return UINT64_MAX;  // saturate
    total *= n;
  }
  return total;
}

PowerGrid PowerGrid::ladder(const Eigen::VectorXd& box_max_mw, double floor_db,
                            double step_db) {
  if (floor_db <= 0.0 || step_db <= 0.0)
    throw std::invalid_argument("PowerGrid::ladder: floor_db and step_db must be > 0");
  PowerGrid grid;
  grid.levels.resize(box_max_mw.size());
  for (Eigen::Index n = 0; n < box_max_mw.size(); ++n) {
    const double top = box_max_mw(n);
    auto& lv = grid.levels[n];
    lv.push_back(0.0);
    if (top <= 0.0) continue;
    // Ascend from top - floor_db to top in step_db increments; land on top
    // exactly so the box maximum is always a grid level.
    const int steps = static_cast<int>(std::floor(floor_db / step_db + 1e-9));
    for (int j = steps; j >= 0; --j) {
      lv.push_back(top * db_to_linear(-step_db * j));
    }
  }
  return grid;
}

std::vector<PowerGrid> make_grids(const Scenario& sc, const GridSpec& spec) {
  std::vector<PowerGrid> grids;
  grids.reserve(sc.n_tones);
  for (int k = 0; k < sc.n_tones; ++k) {
    grids.push_back(PowerGrid::ladder(sc.box_max(k), spec.floor_db, spec.step_db));
  }
  return grids;
}

bool next_grid_point(const PowerGrid& grid, std::vector<int>& idx, bool first) {
  const int n = grid.n_users();
  if (static_cast<int>(idx.size()) != n)
    throw std::invalid_argument("next_grid_point: index size mismatch");
  if (first) {
    for (int i = 0; i < n; ++i) idx[i] = 0;
    return true;
  }
  // Least significant digit is the last user; user 0 is most significant.
  for (int i = n - 1; i >= 0; --i) {
    if (idx[i] + 1 < static_cast<int>(grid.levels[i].size())) {
      ++idx[i];
      for (int j = i + 1; j < n; ++j) idx[j] = 0;
      return true;
    }
  }
  return false;
}

Eigen::VectorXd grid_point(const PowerGrid& grid, const std::vector<int>& idx) {
  const int n = grid.n_users();
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = grid.levels[i][idx[i]];
  return s;
}

}  // namespace spectra
