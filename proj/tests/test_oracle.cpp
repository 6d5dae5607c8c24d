// Oracle tests: the exhaustive joint-enumeration reference, the analytic
// single-user waterfilling solution, and the finite-difference helper.
// These are the independent yardsticks other tests measure solvers
// against, so they get their own hand-built ground truth here.

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spectra/grid.hpp"
#include "spectra/model.hpp"
#include "spectra/oracle.hpp"
#include "spectra/pertone.hpp"
#include "test_util.hpp"

namespace spectra {
namespace {

// Single-user, two-tone instance with binary {0, 1 mW} levels and a
// 1 mW budget: exactly one tone can be on, so the optimum is the better
// tone alone, computable by hand.
Scenario binary_choice(double g0, double g1) {
  Scenario sc;
  sc.n_users = 1;
  sc.n_tones = 2;
  sc.constants.snr_gap = 1.0;
  sc.constants.tone_spacing_hz = 1.0;
  sc.constants.symbol_rate_hz = 1.0;
  sc.weights = Eigen::VectorXd::Constant(1, 1.0);
  sc.budget_mw = Eigen::VectorXd::Constant(1, 1.0);
  sc.mask_mw = Eigen::MatrixXd::Constant(2, 1, 1.0);
  sc.tones.resize(2);
  sc.tones[0].gains_sq = Eigen::MatrixXd::Constant(1, 1, g0);
  sc.tones[0].noise_mw = Eigen::VectorXd::Constant(1, 0.1);
  sc.tones[1].gains_sq = Eigen::MatrixXd::Constant(1, 1, g1);
  sc.tones[1].noise_mw = Eigen::VectorXd::Constant(1, 0.1);
  sc.validate();
  return sc;
}

std::vector<PowerGrid> binary_grids() {
  PowerGrid g;
  g.levels = {{0.0, 1.0}};
  return {g, g};
}

TEST(Oracle, BruteForceFindsHandOptimum) {
  Scenario sc = binary_choice(0.5, 2.0);  // tone 1 is the better channel
  OracleResult res = brute_force_cwrs(sc, binary_grids());
  EXPECT_EQ(res.enumerated, 4u);
  // Feasible points: (0,0) -> 0; (0,1) -> log2(21); (1,0) -> log2(6);
  // (1,1) is over budget. Optimum: tone 1 on.
  EXPECT_NEAR(res.best_value, std::log2(21.0), 1e-12);
  EXPECT_EQ(res.best_alloc.tones[0](0), 0.0);
  EXPECT_EQ(res.best_alloc.tones[1](0), 1.0);
}

TEST(Oracle, BruteForceTieKeepsLexicographicallySmallest) {
  Scenario sc = binary_choice(2.0, 2.0);  // identical tones: exact tie
  OracleResult res = brute_force_cwrs(sc, binary_grids());
  EXPECT_NEAR(res.best_value, std::log2(21.0), 1e-12);
  // (0,1) enumerates before (1,0) (tone 0 most significant, ascending),
  // and strict improvement is required to replace the incumbent.
  EXPECT_EQ(res.best_alloc.tones[0](0), 0.0);
  EXPECT_EQ(res.best_alloc.tones[1](0), 1.0);
}

TEST(Oracle, BruteForceBudgetInfeasiblePointsAreSkipped) {
  // Make both tones worth using; the budget still allows only one.
  Scenario sc = binary_choice(5.0, 5.0);
  OracleResult res = brute_force_cwrs(sc, binary_grids());
  Eigen::VectorXd totals = res.best_alloc.user_totals();
  EXPECT_LE(totals(0), sc.budget_mw(0) + 1e-9);
  EXPECT_NEAR(res.best_value, std::log2(51.0), 1e-12);
}

TEST(Oracle, BruteForceRefusesOversizedEnumeration) {
  Scenario sc = testing::random_instance(2, 4, 401);
  std::vector<PowerGrid> grids = make_grids(sc, GridSpec{60.0, 1.0});
  // 62 levels per user per tone: (62^2)^4 combinations, far over any cap.
  EXPECT_THROW(brute_force_cwrs(sc, grids, /*cap=*/1'000'000),
               std::invalid_argument);
  // Wrong grid count is rejected up front.
  grids.pop_back();
  EXPECT_THROW(brute_force_cwrs(sc, grids), std::invalid_argument);
}

TEST(Oracle, BruteForceDominatesSampledFeasiblePoints) {
  Scenario sc = testing::random_instance(2, 3, 411);
  sc.budget_mw *= 0.6;
  sc.validate();
  std::vector<PowerGrid> grids = make_grids(sc, GridSpec{12.0, 4.0});
  OracleResult res = brute_force_cwrs(sc, grids);
  EXPECT_TRUE(within_box(sc, res.best_alloc, 1e-12));
  EXPECT_EQ(budget_violation(sc, res.best_alloc).maxCoeff(), 0.0);

  std::mt19937 rng(412);
  for (int trial = 0; trial < 300; ++trial) {
    SpectrumAllocation s;
    for (int k = 0; k < sc.n_tones; ++k) {
      Eigen::VectorXd p(sc.n_users);
      for (int n = 0; n < sc.n_users; ++n) {
        const auto& lv = grids[static_cast<std::size_t>(k)].levels[n];
        p(n) = lv[rng() % lv.size()];
      }
      s.tones.push_back(p);
    }
    if (budget_violation(sc, s).maxCoeff() > 0.0) continue;
    EXPECT_LE(weighted_rate_sum(sc, s), res.best_value + 1e-12);
  }
}

TEST(Oracle, BruteForceSatisfiesWeakDuality) {
  // Any dual value built from per-tone maxima over the same grid bounds
  // the feasible optimum from above.
  Scenario sc = testing::random_instance(2, 3, 421);
  sc.budget_mw *= 0.6;
  sc.validate();
  GridSpec gs{12.0, 4.0};
  std::vector<PowerGrid> grids = make_grids(sc, gs);
  OracleResult res = brute_force_cwrs(sc, grids);

  for (unsigned trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd lam = testing::random_lambda(2, 422 + trial, 1.0);
    double dual = lam.dot(sc.budget_mw);
    for (int k = 0; k < sc.n_tones; ++k) {
      ToneRef t = make_tone_ref(sc, k);
      dual += solve_exhaustive(t, grids[static_cast<std::size_t>(k)], lam,
                               ProxConfig::off())
                  .value;
    }
    EXPECT_GE(dual, res.best_value - 1e-9 * (1.0 + std::abs(dual)));
  }
}

TEST(Oracle, WaterfillingEqualizesWaterLevels) {
  Scenario sc = testing::random_instance(1, 8, 431);
  sc.budget_mw(0) = 0.3 * sc.box_totals()(0);
  sc.validate();
  SpectrumAllocation wf = waterfilling_1user(sc);

  EXPECT_TRUE(within_box(sc, wf, 1e-12));
  // The budget binds (it is far below the box total).
  EXPECT_NEAR(wf.user_totals()(0), sc.budget_mw(0),
              1e-6 * sc.budget_mw(0));

  // Interior tones share one water level s_k + Gamma*sigma_k/g_k.
  const double gamma = sc.constants.snr_gap;
  std::vector<double> levels;
  for (int k = 0; k < sc.n_tones; ++k) {
    const double s = wf.tones[k](0);
    const double cap = sc.box_max(k)(0);
    if (s > 1e-9 && s < cap - 1e-9) {
      levels.push_back(s + gamma * sc.tones[k].noise_mw(0) /
                               sc.tones[k].gains_sq(0, 0));
    }
  }
  ASSERT_GE(levels.size(), 2u);
  const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
  EXPECT_LE(*hi - *lo, 1e-6 * *hi);
}

TEST(Oracle, WaterfillingSaturatesWhenBudgetIsLoose) {
  Scenario sc = testing::random_instance(1, 4, 441);
  sc.budget_mw(0) = 2.0 * sc.box_totals()(0);
  sc.validate();
  SpectrumAllocation wf = waterfilling_1user(sc);
  for (int k = 0; k < sc.n_tones; ++k) {
    EXPECT_EQ(wf.tones[k](0), sc.box_max(k)(0)) << k;
  }
  Scenario two = testing::random_instance(2, 2, 442);
  EXPECT_THROW(waterfilling_1user(two), std::invalid_argument);
}

TEST(Oracle, WaterfillingBeatsPerturbations) {
  // Local optimality: budget-preserving transfers between tones never
  // increase the rate.
  Scenario sc = testing::random_instance(1, 6, 451);
  sc.budget_mw(0) = 0.4 * sc.box_totals()(0);
  sc.validate();
  SpectrumAllocation wf = waterfilling_1user(sc);
  const double best = weighted_rate_sum(sc, wf);

  std::mt19937 rng(452);
  std::uniform_real_distribution<double> frac(0.01, 0.2);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int a = static_cast<int>(rng() % 6);
    const int b = static_cast<int>(rng() % 6);
    if (a == b) continue;
    SpectrumAllocation mod = wf;
    const double delta = frac(rng) * sc.budget_mw(0) / 6.0;
    mod.tones[a](0) -= delta;
    mod.tones[b](0) += delta;
    if (mod.tones[a](0) < 0.0 || mod.tones[b](0) > sc.box_max(b)(0)) continue;
    ++tested;
    EXPECT_LE(weighted_rate_sum(sc, mod), best + 1e-9 * best);
  }
  EXPECT_GE(tested, 20);
}

TEST(Oracle, FiniteDifferenceIsExactForQuadratics) {
  // Central differences are exact (up to rounding) on quadratics.
  Eigen::MatrixXd A(2, 2);
  A << 3.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd b(2);
  b << -1.0, 4.0;
  auto fn = [&](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(A * x) + b.dot(x) + 7.0;
  };
  Eigen::VectorXd x0(2);
  x0 << 0.3, -0.2;
  Eigen::VectorXd grad = finite_diff_gradient(fn, x0, 1e-4);
  Eigen::VectorXd expect = A * x0 + b;
  EXPECT_NEAR(grad(0), expect(0), 1e-9);
  EXPECT_NEAR(grad(1), expect(1), 1e-9);

  EXPECT_THROW(finite_diff_gradient(fn, x0, 0.0), std::invalid_argument);
  EXPECT_THROW(finite_diff_gradient(fn, x0, -1e-3), std::invalid_argument);
}

}  // namespace
}  // namespace spectra
