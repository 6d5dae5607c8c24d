// Microbenchmarks covering the hot paths: single-tone solvers (grid
// enumeration, coordinate descent, fixed point, multistart, exact
// concave), full dual sweeps, surrogate construction, and short master
// solver loops on the bundled presets.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "spectra/convex_approx.hpp"
#include "spectra/dual.hpp"
#include "spectra/grid.hpp"
#include "spectra/model.hpp"
#include "spectra/pertone.hpp"
#include "spectra/presets.hpp"

namespace {

using namespace spectra;

const Scenario& adsl() {
  static const Scenario sc = preset("adsl-nearfar-2");
  return sc;
}

const Scenario& vdsl6() {
  static const Scenario sc = preset("vdsl-up-6");
  return sc;
}

const ConvexApprox& adsl_approx() {
  static const ConvexApprox ap = build_approx(adsl(), flat_start(adsl()));
  return ap;
}

Eigen::VectorXd mid_lambda(const Scenario& sc) {
  // A mid-scale multiplier so the per-tone problems are neither trivial
  // (lambda = 0 saturates the box) nor all-zero.
  Eigen::VectorXd lam(sc.n_users);
  const double scale =
      sc.weights.sum() * sc.constants.symbol_rate_hz / sc.budget_mw.mean();
  lam.setConstant(scale);
  return lam;
}

void BM_PertoneExhaustive(benchmark::State& state) {
  const Scenario& sc = adsl();
  const int k = sc.n_tones / 2;
  const ToneRef tone = make_tone_ref(sc, k);
  const PowerGrid grid = PowerGrid::ladder(tone.box, 60.0, 1.0);
  const Eigen::VectorXd lam = mid_lambda(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_exhaustive(tone, grid, lam, ProxConfig::off()));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(grid.combinations()));
}
BENCHMARK(BM_PertoneExhaustive);

void BM_PertoneCoordinateDescent(benchmark::State& state) {
  const Scenario& sc = adsl();
  const ToneRef tone = make_tone_ref(sc, sc.n_tones / 2);
  const PowerGrid grid = PowerGrid::ladder(tone.box, 60.0, 1.0);
  const Eigen::VectorXd lam = mid_lambda(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_coordinate_descent(tone, grid, lam, ProxConfig::off()));
  }
}
BENCHMARK(BM_PertoneCoordinateDescent);

void BM_PertoneFixedPoint6User(benchmark::State& state) {
  const Scenario& sc = vdsl6();
  const ToneRef tone = make_tone_ref(sc, sc.n_tones / 2);
  const Eigen::VectorXd lam = mid_lambda(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_fixed_point(tone, lam, ProxConfig::off(), ApproxSlice{}, 3));
  }
}
BENCHMARK(BM_PertoneFixedPoint6User);

void BM_PertoneMultistart6User(benchmark::State& state) {
  const Scenario& sc = vdsl6();
  const ToneRef tone = make_tone_ref(sc, sc.n_tones / 2);
  const Eigen::VectorXd lam = mid_lambda(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_multistart_fixed_point(
        tone, lam, ProxConfig::off(), ApproxSlice{}, 15));
  }
}
BENCHMARK(BM_PertoneMultistart6User);

void BM_PertoneConcaveExact(benchmark::State& state) {
  const Scenario& sc = adsl();
  const int k = sc.n_tones / 2;
  const ToneRef tone = make_tone_ref(sc, k);
  const ApproxSlice slice = adsl_approx().slice(k);
  const Eigen::VectorXd lam = mid_lambda(sc);
  const ProxConfig prox = ProxConfig::with_c(1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_concave_exact(tone, lam, prox, slice));
  }
}
BENCHMARK(BM_PertoneConcaveExact);

void BM_BuildApprox(benchmark::State& state) {
  const Scenario& sc = adsl();
  const SpectrumAllocation flat = flat_start(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_approx(sc, flat));
  }
  state.SetItemsProcessed(state.iterations() * sc.n_tones);
}
BENCHMARK(BM_BuildApprox);

void BM_DualSweepConcaveExact(benchmark::State& state) {
  const Scenario& sc = adsl();
  PertoneOptions opt;
  opt.kind = PerToneSolverKind::concave_exact;
  const Eigen::VectorXd lam = mid_lambda(sc);
  const ProxConfig prox = ProxConfig::with_c(1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_sweep(sc, lam, prox, opt, &adsl_approx()));
  }
  state.SetItemsProcessed(state.iterations() * sc.n_tones);
}
BENCHMARK(BM_DualSweepConcaveExact);

void BM_DualSweepFixedPoint6User(benchmark::State& state) {
  const Scenario& sc = vdsl6();
  PertoneOptions opt;
  opt.kind = PerToneSolverKind::fixed_point;
  const Eigen::VectorXd lam = mid_lambda(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dual_sweep(sc, lam, ProxConfig::off(), opt, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * sc.n_tones);
}
BENCHMARK(BM_DualSweepFixedPoint6User);

void BM_SolveImprovedConvex50(benchmark::State& state) {
  const Scenario& sc = adsl();
  SolverConfig cfg;
  cfg.pertone.kind = PerToneSolverKind::concave_exact;
  cfg.i_max = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_improved(sc, cfg, &adsl_approx()));
  }
}
BENCHMARK(BM_SolveImprovedConvex50)->Unit(benchmark::kMillisecond);

void BM_SolveSubgradient50(benchmark::State& state) {
  const Scenario& sc = adsl();
  SolverConfig cfg;
  cfg.pertone.kind = PerToneSolverKind::concave_exact;
  cfg.i_max = 50;
  cfg.q = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_subgradient(sc, cfg, &adsl_approx()));
  }
}
BENCHMARK(BM_SolveSubgradient50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
