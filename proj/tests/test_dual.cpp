// Dual-decomposition solver tests: the multiplier update algebra, weak
// duality, the smoothing sandwich, convergence on instances with an
// independently computed optimum, and the tie-rotation primal recovery.

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spectra/convex_approx.hpp"
#include "spectra/dual.hpp"
#include "spectra/grid.hpp"
#include "spectra/model.hpp"
#include "spectra/oracle.hpp"
#include "spectra/pertone.hpp"
#include "test_util.hpp"

namespace spectra {
namespace {

PertoneOptions exact_pertone() {
  PertoneOptions opt;
  opt.kind = PerToneSolverKind::concave_exact;
  return opt;
}

PertoneOptions exhaustive_pertone(double floor_db = 30.0, double step_db = 3.0) {
  PertoneOptions opt;
  opt.kind = PerToneSolverKind::exhaustive;
  opt.grid = GridSpec{floor_db, step_db};
  return opt;
}

TEST(DualStep, HandComputedTwoIterations) {
  DualState st = DualState::init(2, /*lipschitz=*/4.0);
  Eigen::VectorXd dg1(2);
  dg1 << 2.0, -1.0;
  dual_step(st, dg1);
  // u = [dg/L]+ = (0.5, 0); tmp = 0.5*dg = (1, -0.5); v = [tmp/L]+ =
  // (0.25, 0); lambda = (1*u + 2*v)/3 = (1/3, 0).
  EXPECT_EQ(st.iter, 1);
  EXPECT_NEAR(st.u(0), 0.5, 1e-15);
  EXPECT_EQ(st.u(1), 0.0);
  EXPECT_NEAR(st.v(0), 0.25, 1e-15);
  EXPECT_NEAR(st.lambda(0), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(st.lambda(1), 0.0);

  Eigen::VectorXd dg2(2);
  dg2 << -4.0, 8.0;
  dual_step(st, dg2);
  // u = [(-1, 2) + (1/3, 0)]+ = (0, 2); tmp += 1*dg2 -> (-3, 7.5);
  // v = (0, 1.875); lambda = (2u + 2v)/4 = (0, 1.9375).
  EXPECT_EQ(st.iter, 2);
  EXPECT_EQ(st.u(0), 0.0);
  EXPECT_NEAR(st.u(1), 2.0, 1e-15);
  EXPECT_NEAR(st.v(1), 1.875, 1e-15);
  EXPECT_EQ(st.lambda(0), 0.0);
  EXPECT_NEAR(st.lambda(1), 1.9375, 1e-15);

  EXPECT_THROW(DualState::init(0, 1.0), std::invalid_argument);
  EXPECT_THROW(DualState::init(2, 0.0), std::invalid_argument);
}

TEST(Dual, ProxDiameterIsHalfSquaredBoxNorm) {
  Scenario sc = testing::random_instance(2, 3, 201);
  double manual = 0.0;
  for (int k = 0; k < sc.n_tones; ++k) {
    manual += 0.5 * sc.box_max(k).squaredNorm();
  }
  EXPECT_NEAR(prox_diameter_sum(sc), manual, 1e-12 * manual);
  const double eps = 0.125;
  EXPECT_NEAR(smoothness_c_for(sc, eps), eps / manual, 1e-15);
}

TEST(Dual, LagrangianBoundHoldsForArbitraryBoxPoints) {
  // g(lambda) >= F(s) - lambda^T (sum_k s_k - P_tot) for every s in the
  // box, feasible or not: the per-tone max dominates each term.
  Scenario sc = testing::random_instance(2, 4, 211);
  PertoneOptions opt = exhaustive_pertone();
  std::vector<PowerGrid> grids = make_grids(sc, opt.grid);

  for (unsigned trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd lam = testing::random_lambda(2, 212 + trial, 0.8);
    const double g = dual_value(sc, lam, ProxConfig::off(), opt);
    for (unsigned inner = 0; inner < 20; ++inner) {
      // Arbitrary grid allocation (random level indices).
      SpectrumAllocation s;
      std::mt19937 rng(4000 + trial * 100 + inner);
      for (int k = 0; k < sc.n_tones; ++k) {
        Eigen::VectorXd p(sc.n_users);
        for (int n = 0; n < sc.n_users; ++n) {
          const auto& lv = grids[k].levels[n];
          p(n) = lv[rng() % lv.size()];
        }
        s.tones.push_back(p);
      }
      const double lhs = weighted_rate_sum(sc, s) -
                         lam.dot(s.user_totals() - sc.budget_mw);
      EXPECT_GE(g, lhs - 1e-9 * (1.0 + std::abs(g)));
    }
  }
}

TEST(Dual, SmoothingSandwich) {
  // g_bar <= g <= g_bar + c * sum_k D_k, with both sides evaluated by the
  // exact concave-surrogate maximizer.
  Scenario sc = testing::random_instance(3, 3, 221);
  ConvexApprox approx = build_approx(sc, flat_start(sc));
  const double dsum = prox_diameter_sum(sc);

  for (double eps_frac : {1e-1, 1e-2}) {
    const double g0 = objective_scale(sc, exact_pertone(), &approx);
    const double c = smoothness_c_for(sc, eps_frac * g0);
    for (unsigned trial = 0; trial < 6; ++trial) {
      Eigen::VectorXd lam = testing::random_lambda(3, 222 + trial, 1.0);
      const double g =
          dual_value(sc, lam, ProxConfig::off(), exact_pertone(), &approx);
      const double g_bar =
          dual_value(sc, lam, ProxConfig::with_c(c), exact_pertone(), &approx);
      EXPECT_LE(g_bar, g + 1e-9 * std::abs(g));
      EXPECT_GE(g_bar + c * dsum, g - 1e-9 * std::abs(g));
    }
  }
}

TEST(Dual, SmoothedGradientMatchesFiniteDifferences) {
  // On the smoothed surrogate dual the residual sum_k s_k(lambda) - P_tot
  // equals -grad g_bar exactly (the dual is minimized along +residual).
  Scenario sc = testing::random_instance(2, 3, 231);
  ConvexApprox approx = build_approx(sc, flat_start(sc));
  const double c = smoothness_c_for(sc, 1e-2 * objective_scale(
                                             sc, exact_pertone(), &approx));
  ProxConfig prox = ProxConfig::with_c(c);

  Eigen::VectorXd lam = testing::random_lambda(2, 232, 0.5).array() + 0.05;
  Eigen::VectorXd dg =
      dual_subgradient(sc, lam, prox, exact_pertone(), &approx);
  Eigen::VectorXd fd = finite_diff_gradient(
      [&](const Eigen::VectorXd& l) {
        return dual_value(sc, l, prox, exact_pertone(), &approx);
      },
      lam, 1e-5);
  for (int n = 0; n < 2; ++n) {
    EXPECT_NEAR(fd(n), -dg(n), 1e-4 * (1.0 + std::abs(dg(n)))) << n;
  }
}

TEST(Dual, FeasibleAtZeroMultiplierStopsAtIterationZero) {
  // Budgets four times the whole box: lambda = 0 is already optimal and
  // both solvers must report convergence at iteration zero.
  Scenario sc = testing::random_instance(2, 3, 241);
  sc.budget_mw = 4.0 * sc.box_totals();  // mask rows still cap the box
  sc.validate();

  SolverConfig cfg;
  cfg.pertone = exhaustive_pertone();
  SolverReport sub = solve_subgradient(sc, cfg);
  EXPECT_TRUE(sub.converged);
  EXPECT_EQ(sub.iterations, 1);  // one sweep, stopped at i = 0
  EXPECT_EQ(sub.lambda_hat.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sub.violation_norm, 0.0);

  SolverConfig icfg;
  icfg.pertone.kind = PerToneSolverKind::fixed_point;
  SolverReport imp = solve_improved(sc, icfg);
  EXPECT_TRUE(imp.converged);
  EXPECT_EQ(imp.iterations, 1);
  EXPECT_EQ(imp.lambda_hat.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dual, OneUserAgreesWithBisectionAndWaterfilling) {
  Scenario sc = testing::random_instance(1, 8, 251);
  sc.budget_mw(0) = 0.35 * sc.box_totals()(0);  // make the budget bind
  sc.validate();

  // Test-side reference: single-user demand at lambda has a closed form
  // clip(w*fs/(ln2*lambda) - Gamma*sigma_k/g_k, [0, box]); bisect it.
  const double w = sc.weights(0);
  const double fs = sc.constants.symbol_rate_hz;
  const double gamma = sc.constants.snr_gap;
  auto demand = [&](double lambda) {
    double total = 0.0;
    for (int k = 0; k < sc.n_tones; ++k) {
      const double uncon = w * fs / (std::log(2.0) * lambda) -
                           gamma * sc.tones[k].noise_mw(0) /
                               sc.tones[k].gains_sq(0, 0);
      total += std::clamp(uncon, 0.0, sc.box_max(k)(0));
    }
    return total;
  };
  double lo = 1e-9, hi = 1e9;
  for (int b = 0; b < 200; ++b) {
    const double mid = std::sqrt(lo * hi);
    (demand(mid) > sc.budget_mw(0) ? lo : hi) = mid;
  }
  const double lambda_star = std::sqrt(lo * hi);

  SolverConfig cfg;
  cfg.pertone.kind = PerToneSolverKind::fixed_point;
  cfg.i_max = 2000;
  SolverReport sub = solve_subgradient(sc, cfg);
  EXPECT_TRUE(sub.converged);
  EXPECT_NEAR(sub.lambda_hat(0), lambda_star, 0.05 * lambda_star);

  // Primal certificate: the recovered spectra are near the analytic
  // single-user waterfilling optimum in value.
  SpectrumAllocation wf = waterfilling_1user(sc);
  const double best = weighted_rate_sum(sc, wf);
  EXPECT_TRUE(within_box(sc, sub.spectra, 1e-9));
  EXPECT_LE(budget_violation(sc, sub.spectra).maxCoeff(),
            1e-2 * sc.budget_mw(0));
  EXPECT_GE(sub.primal_value, 0.99 * best);
  // Weak duality on the true dual.
  EXPECT_GE(sub.dual_value, best - 1e-9 * best);

  SolverReport imp = solve_improved(sc, cfg);
  EXPECT_TRUE(imp.converged);
  EXPECT_NEAR(imp.lambda_hat(0), lambda_star, 0.05 * lambda_star);
  EXPECT_GE(imp.primal_value, 0.99 * best);
}

TEST(Dual, SubgradientExhaustsBudgetHonestly) {
  Scenario sc = testing::random_instance(2, 3, 261);
  sc.budget_mw *= 0.1;  // demand at lambda = 0 far exceeds the budget
  sc.validate();
  SolverConfig cfg;
  cfg.pertone.kind = PerToneSolverKind::fixed_point;
  cfg.i_max = 3;
  SolverReport rep = solve_subgradient(sc, cfg);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations, 3);
  EXPECT_EQ(rep.trace.size(), 3u);
  EXPECT_FALSE(rep.note.empty());
  // The trace is still fully populated and the primal is in the box.
  EXPECT_TRUE(within_box(sc, rep.spectra, 1e-12));
}

TEST(Dual, ImprovedConvexModeRunsFullScheduleAndAverages) {
  Scenario sc = testing::random_instance(2, 3, 271);
  sc.budget_mw *= 0.4;
  sc.validate();
  ConvexApprox approx = build_approx(sc, flat_start(sc));

  SolverConfig cfg;
  cfg.pertone = exact_pertone();
  cfg.epsilon = 1e-2 * objective_scale(sc, cfg.pertone, &approx);
  cfg.i_max = 60;
  SolverReport rep = solve_improved(sc, cfg, &approx);

  // Fixed schedule: i = 0..i_max inclusive, always reported converged,
  // lambda_hat is the final updated multiplier (not a trace row).
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.trace.size(), 61u);
  EXPECT_EQ(rep.iterations, 61);
  EXPECT_EQ(rep.i_max, 60);
  EXPECT_GT(rep.smoothness_c, 0.0);
  EXPECT_NEAR(rep.lipschitz, sc.n_tones / rep.smoothness_c,
              1e-9 * rep.lipschitz);
  for (const TraceRow& row : rep.trace) {
    EXPECT_TRUE((row.lambda.array() >= 0.0).all());
  }
  // The averaged primal lies in the box (a convex combination of
  // per-sweep maximizers) and nearly exhausts feasibility.
  EXPECT_TRUE(within_box(sc, rep.spectra, 1e-9));
  // Reported dual value is the smoothed dual at lambda_hat.
  const double g_bar = dual_value(sc, rep.lambda_hat,
                                  ProxConfig::with_c(rep.smoothness_c),
                                  cfg.pertone, &approx);
  EXPECT_NEAR(rep.dual_value, g_bar, 1e-9 * std::abs(g_bar));
}

TEST(Dual, TheoremIterationCountDoublesWhenEpsilonHalves) {
  Scenario sc = testing::random_instance(2, 4, 281);
  const double eps = 0.05;
  // i_max + 1 = 2*sqrt(K * sum_D)/eps exactly, before rounding.
  const double expect =
      2.0 * std::sqrt(sc.n_tones * prox_diameter_sum(sc)) / eps - 1.0;
  EXPECT_NEAR(imax_real(sc, eps), expect, 1e-9 * std::abs(expect));
  EXPECT_NEAR(imax_real(sc, eps / 2) + 1.0, 2.0 * (imax_real(sc, eps) + 1.0),
              1e-9);
  EXPECT_EQ(theorem2_imax(sc, eps),
            static_cast<int>(std::ceil(expect)));
  EXPECT_THROW(imax_real(sc, 0.0), std::invalid_argument);

  // Violation bound closed form at a couple of hand points.
  EXPECT_NEAR(theorem2_violation_bound(0.1, 0.0), 0.1 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(theorem2_violation_bound(0.5, 1.0),
              0.5 * (1.0 + std::sqrt(3.0)), 1e-15);
}

TEST(Dual, RecoverInterleavedRotatesByToneIndex) {
  // Three tied optima per tone: tone k (1-based) must take 1-based
  // element rem(k, 3) + 1, i.e. 2, 3, 1, 2, 3, 1 for six tones.
  auto point = [](double x) {
    return Eigen::VectorXd::Constant(1, x);
  };
  std::vector<PerToneSolution> pertone(6);
  for (auto& sol : pertone) {
    sol.optima = {point(1.0), point(2.0), point(3.0)};
    sol.best = sol.optima.front();
    sol.value = 0.0;
  }
  SpectrumAllocation out = recover_interleaved(pertone);
  ASSERT_EQ(out.n_tones(), 6);
  const std::vector<double> expect = {2.0, 3.0, 1.0, 2.0, 3.0, 1.0};
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(out.tones[k](0), expect[static_cast<std::size_t>(k)]) << k;
  }
  // Singleton tie sets always select the unique optimum.
  for (auto& sol : pertone) sol.optima = {point(7.0)};
  out = recover_interleaved(pertone);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(out.tones[k](0), 7.0);
  // Empty tie sets are a caller bug.
  pertone[2].optima.clear();
  EXPECT_THROW(recover_interleaved(pertone), std::invalid_argument);
}

TEST(Dual, AutoTolerancesScaleWithObjective) {
  Scenario sc = testing::random_instance(2, 3, 291);
  sc.budget_mw *= 0.4;
  sc.validate();
  ConvexApprox approx = build_approx(sc, flat_start(sc));
  const double g0 = objective_scale(sc, exact_pertone(), &approx);

  SolverConfig cfg;
  cfg.pertone = exact_pertone();
  cfg.i_max = 40;
  SolverReport rep = solve_improved(sc, cfg, &approx);
  EXPECT_NEAR(rep.epsilon, 1e-3 * g0, 1e-9 * g0);
  EXPECT_NEAR(rep.smoothness_c, rep.epsilon / prox_diameter_sum(sc),
              1e-12 * rep.smoothness_c);
}

TEST(Dual, IcaDsbOneUserMatchesWaterfilling) {
  Scenario sc = testing::random_instance(1, 6, 301);
  sc.budget_mw(0) = 0.3 * sc.box_totals()(0);
  sc.validate();

  // The averaged primal is only epsilon-feasible, so pick epsilon a few
  // times tighter than the auto rule to make the residual small against
  // the budget; the principled cap is the closed-form violation bound.
  ConvexApprox probe = build_approx(sc, flat_start(sc));
  const double g0 = objective_scale(sc, exact_pertone(), &probe);

  SolverConfig cfg;
  cfg.pertone = exact_pertone();
  cfg.epsilon = 2e-4 * g0;
  SolverReport rep = solve_ica_dsb(sc, cfg);
  SpectrumAllocation wf = waterfilling_1user(sc);
  const double best = weighted_rate_sum(sc, wf);

  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(within_box(sc, rep.spectra, 1e-9));
  const double viol = budget_violation(sc, rep.spectra).maxCoeff();
  const double bound =
      theorem2_violation_bound(rep.epsilon, rep.lambda_hat.norm());
  EXPECT_LE(viol, bound * (1.0 + 1e-6) + 1e-12);
  EXPECT_LE(viol, 5e-2 * sc.budget_mw(0));
  EXPECT_GE(rep.primal_value, 0.995 * best);
  EXPECT_FALSE(rep.outer_objective.empty());
}

TEST(Dual, IcaDsbApproachesBruteForceOptimum) {
  Scenario sc = testing::random_instance(2, 3, 311);
  sc.budget_mw *= 0.5;
  sc.validate();

  std::vector<PowerGrid> grids = make_grids(sc, GridSpec{20.0, 4.0});
  OracleResult oracle = brute_force_cwrs(sc, grids);

  ConvexApprox probe = build_approx(sc, flat_start(sc));
  const double g0 = objective_scale(sc, exact_pertone(), &probe);

  SolverConfig cfg;
  cfg.pertone = exact_pertone();
  cfg.epsilon = 2e-4 * g0;  // averaged primal is epsilon-feasible
  SolverReport rep = solve_ica_dsb(sc, cfg);

  EXPECT_TRUE(within_box(sc, rep.spectra, 1e-9));
  const double viol = budget_violation(sc, rep.spectra).maxCoeff();
  EXPECT_LE(viol, theorem2_violation_bound(rep.epsilon,
                                           rep.lambda_hat.norm()) *
                          (1.0 + 1e-6) +
                      1e-12);
  EXPECT_LE(viol, 5e-2 * sc.budget_mw.minCoeff());
  // The continuous solver must reach the discrete oracle's value up to a
  // small optimality margin (it may legitimately exceed it).
  EXPECT_GE(rep.primal_value, 0.98 * oracle.best_value);
  // Successive outer objectives never decrease materially.
  for (std::size_t i = 1; i < rep.outer_objective.size(); ++i) {
    EXPECT_GE(rep.outer_objective[i],
              rep.outer_objective[i - 1] - 1e-6 * std::abs(rep.outer_objective[i]));
  }
}

TEST(Dual, DiscreteSolversRejectSurrogateAndViceVersa) {
  Scenario sc = testing::random_instance(2, 2, 321);
  ConvexApprox approx = build_approx(sc, flat_start(sc));
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(
      dual_value(sc, lam, ProxConfig::off(), exhaustive_pertone(), &approx),
      std::invalid_argument);
  EXPECT_THROW(dual_value(sc, lam, ProxConfig::off(), exact_pertone(), nullptr),
               std::invalid_argument);
}

}  // namespace
}  // namespace spectra
