#include "spectra/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spectra {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

OracleResult brute_force_cwrs(const Scenario& sc,
                              const std::vector<PowerGrid>& grids,
                              std::uint64_t cap) {
  require(static_cast<int>(grids.size()) == sc.n_tones,
          "brute_force_cwrs: one grid per tone required");
  std::uint64_t total = 1;
  for (const auto& g : grids) {
    require(g.n_users() == sc.n_users, "brute_force_cwrs: grid user count");
    const std::uint64_t c = g.combinations();
    total = (total > cap / std::max<std::uint64_t>(c, 1)) ? cap + 1 : total * c;
  }
  if (total > cap) {
    throw std::invalid_argument(
        "brute_force_cwrs: joint grid exceeds the enumeration cap of " +
        std::to_string(cap) + " points; refusing (use a coarser grid)");
  }

  // Flattened odometer: digit (k, n), tone-major, user 0 most significant
  // within a tone.
  const int n_digits = sc.n_tones * sc.n_users;
  std::vector<int> idx(static_cast<std::size_t>(n_digits), 0);
  const auto levels = [&](int d) -> const std::vector<double>& {
    return grids[static_cast<std::size_t>(d / sc.n_users)]
        .levels[static_cast<std::size_t>(d % sc.n_users)];
  };

  SpectrumAllocation alloc = sc.zero_allocation();
  const double budget_slack = 1e-12 * sc.budget_mw.maxCoeff();

  OracleResult out;
  out.best_value = 0.0;
  out.best_alloc = alloc;  // all-zero is always feasible
  bool more = true;
  while (more) {
    ++out.enumerated;
    for (int d = 0; d < n_digits; ++d) {
      alloc.tones[static_cast<std::size_t>(d / sc.n_users)](d % sc.n_users) =
          levels(d)[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
    }
    const Eigen::VectorXd totals = alloc.user_totals();
    if (((totals - sc.budget_mw).array() <= budget_slack).all()) {
      const double value = weighted_rate_sum(sc, alloc);
      if (value > out.best_value) {
        out.best_value = value;
        out.best_alloc = alloc;
      }
    }
    // Advance the least significant digit (last index).
    more = false;
    for (int d = n_digits - 1; d >= 0; --d) {
      auto& digit = idx[static_cast<std::size_t>(d)];
      if (digit + 1 < static_cast<int>(levels(d).size())) {
        ++digit;
        for (int e = d + 1; e < n_digits; ++e) idx[static_cast<std::size_t>(e)] = 0;
        more = true;
        break;
      }
    }
  }
  return out;
}

SpectrumAllocation waterfilling_1user(const Scenario& sc) {
  require(sc.n_users == 1, "waterfilling_1user: single-user scenarios only");
  const double w = sc.weights(0);
  const double fs = sc.constants.symbol_rate_hz;
  const double gamma = sc.constants.snr_gap;
  const double budget = sc.budget_mw(0);
  require(w > 0.0, "waterfilling_1user: user weight must be positive");

  // Per-tone noise floor Γσ/|h|² and box cap.
  Eigen::VectorXd floor(sc.n_tones), cap(sc.n_tones);
  for (int k = 0; k < sc.n_tones; ++k) {
    const ToneChannel& ch = sc.tones[static_cast<std::size_t>(k)];
    floor(k) = gamma * ch.noise_mw(0) / ch.gains_sq(0, 0);
    cap(k) = sc.box_max(k)(0);
  }

  const auto fill = [&](double lambda) {
    const double level = w * fs / (lambda * kLn2);
    return (Eigen::VectorXd::Constant(sc.n_tones, level) - floor)
        .cwiseMax(0.0)
        .cwiseMin(cap);
  };

  Eigen::VectorXd powers;
  if (cap.sum() <= budget) {
    powers = cap;  // budget never binds: every tone at its box maximum
  } else {
    // Bisect the multiplier; the filled total is decreasing in λ.
    double lo = 1e-300;
    double hi = w * fs / (kLn2 * floor.minCoeff() + 1e-300);
    while (fill(hi).sum() > budget) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fill(mid).sum() > budget ? lo : hi) = mid;
    }
    powers = fill(0.5 * (lo + hi));
  }

  SpectrumAllocation alloc;
  alloc.tones.reserve(static_cast<std::size_t>(sc.n_tones));
  for (int k = 0; k < sc.n_tones; ++k) {
    alloc.tones.push_back(Eigen::VectorXd::Constant(1, powers(k)));
  }
  return alloc;
}

Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& point, double step) {
  require(step > 0.0, "finite_diff_gradient: step must be positive");
  Eigen::VectorXd grad(point.size());
  Eigen::VectorXd x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    x(i) = point(i) + step;
    const double hi = fn(x);
    x(i) = point(i) - step;
    const double lo = fn(x);
    x(i) = point(i);
    grad(i) = (hi - lo) / (2.0 * step);
  }
  return grad;
}

}  // namespace spectra
