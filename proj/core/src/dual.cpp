#include "spectra/dual.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace spectra {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool reports_ties(PerToneSolverKind kind) {
  return kind == PerToneSolverKind::exhaustive ||
         kind == PerToneSolverKind::multistart_fixed_point;
}

double positive_part_norm(const Eigen::VectorXd& v) {
  return v.cwiseMax(0.0).norm();
}

double max_complementarity(const Eigen::VectorXd& lambda,
                           const Eigen::VectorXd& dg) {
  return (lambda.array() * dg.array()).abs().maxCoeff();
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Triangular-weight primal average Σ (i+1)·s^{i+1} / Σ (i+1); for the full
// Algorithm-1 schedule the weights are exactly 2(i+1)/((i_max+1)(i_max+2)).
class PrimalAverage {
 public:
  void add(int iter, const SpectrumAllocation& alloc) {
    if (acc_.empty()) {
      acc_.assign(alloc.tones.size(),
                  Eigen::VectorXd::Zero(alloc.tones.front().size()));
    }
    const double w = iter + 1.0;
    for (std::size_t k = 0; k < acc_.size(); ++k) acc_[k] += w * alloc.tones[k];
    weight_ += w;
  }

  SpectrumAllocation result() const {
    SpectrumAllocation out;
    out.tones.reserve(acc_.size());
    for (const auto& a : acc_) out.tones.push_back(a / weight_);
    return out;
  }

  bool empty() const { return acc_.empty(); }

 private:
  std::vector<Eigen::VectorXd> acc_;
  double weight_ = 0.0;
};

struct StopRule {
  double eps_a = 0.0;
  double feas_tol = 0.0;        // exact-feasibility slack for the λ⁰ = 0 start
  Eigen::VectorXd near_feas;    // per-user residual allowance, 0.1% of budget

  // Complementarity test of the direct scheme. The product λ_n·residual_n
  // is also small whenever λ is still small early in a run, so the test
  // additionally demands the residual itself be near zero: within 0.1% of
  // each budget in general, and exactly feasible at i = 0 where λ⁰ = 0
  // zeroes every product unconditionally.
  bool satisfied(int iter, const Eigen::VectorXd& lambda,
                 const Eigen::VectorXd& dg) const {
    if (max_complementarity(lambda, dg) >= eps_a) return false;
    if (iter == 0) return (dg.array() <= feas_tol).all();
    return (dg.array() <= near_feas.array()).all();
  }
};

}  // namespace

DualSweep dual_sweep(const Scenario& sc, const Eigen::VectorXd& lambda,
                     const ProxConfig& prox, const PertoneOptions& opt,
                     const ConvexApprox* approx,
                     const SpectrumAllocation* warm) {
  require(lambda.size() == sc.n_users, "dual_sweep: lambda size mismatch");
  const bool discrete = opt.kind == PerToneSolverKind::exhaustive ||
                        opt.kind == PerToneSolverKind::coordinate_descent;
  require(!(discrete && approx != nullptr),
          "dual_sweep: grid search runs on the true objective only");
  require(!(opt.kind == PerToneSolverKind::concave_exact && approx == nullptr),
          "dual_sweep: exact concave solver needs a frozen approximation");
  if (warm != nullptr) {
    require(warm->n_tones() == sc.n_tones, "dual_sweep: warm size mismatch");
  }

  std::vector<PowerGrid> grids;
  if (discrete) grids = make_grids(sc, opt.grid);

  // Iterative KKT sweeps seeded at zero stall on an exact cancellation in
  // the update denominator; seed them with flat spectra instead.
  SpectrumAllocation flat;
  if (opt.kind == PerToneSolverKind::fixed_point && warm == nullptr) {
    flat = flat_start(sc);
  }

  DualSweep sw;
  sw.totals = Eigen::VectorXd::Zero(sc.n_users);
  sw.alloc.tones.reserve(static_cast<std::size_t>(sc.n_tones));
  sw.pertone.reserve(static_cast<std::size_t>(sc.n_tones));

  for (int k = 0; k < sc.n_tones; ++k) {
    const ToneRef t = make_tone_ref(sc, k);
    const ApproxSlice slice = approx ? approx->slice(k) : ApproxSlice{};
    const Eigen::VectorXd* seed =
        warm ? &warm->tones[static_cast<std::size_t>(k)]
             : (flat.n_tones() > 0 ? &flat.tones[static_cast<std::size_t>(k)]
                                   : nullptr);

    PerToneSolution sol;
    switch (opt.kind) {
      case PerToneSolverKind::exhaustive:
        sol = solve_exhaustive(t, grids[static_cast<std::size_t>(k)], lambda,
                               prox, opt.ties);
        break;
      case PerToneSolverKind::coordinate_descent:
        sol = solve_coordinate_descent(t, grids[static_cast<std::size_t>(k)],
                                       lambda, prox, seed);
        break;
      case PerToneSolverKind::fixed_point:
        sol = solve_fixed_point(t, lambda, prox, slice, opt.inner_iters, seed);
        break;
      case PerToneSolverKind::multistart_fixed_point:
        sol = solve_multistart_fixed_point(t, lambda, prox, slice,
                                           opt.multistart_iters,
                                           opt.ties.rel_tol);
        break;
      case PerToneSolverKind::concave_exact:
        sol = solve_concave_exact(t, lambda, prox, slice);
        break;
    }
    sw.value += sol.value;
    sw.totals += sol.best;
    sw.alloc.tones.push_back(sol.best);
    sw.pertone.push_back(std::move(sol));
  }
  sw.value += lambda.dot(sc.budget_mw);
  return sw;
}

double dual_value(const Scenario& sc, const Eigen::VectorXd& lambda,
                  const ProxConfig& prox, const PertoneOptions& opt,
                  const ConvexApprox* approx) {
  return dual_sweep(sc, lambda, prox, opt, approx).value;
}

Eigen::VectorXd dual_subgradient(const Scenario& sc,
                                 const Eigen::VectorXd& lambda,
                                 const ProxConfig& prox,
                                 const PertoneOptions& opt,
                                 const ConvexApprox* approx) {
  return dual_sweep(sc, lambda, prox, opt, approx).totals - sc.budget_mw;
}

DualState DualState::init(int n_users, double lipschitz) {
  require(n_users > 0, "DualState: need at least one user");
  require(lipschitz > 0.0, "DualState: Lipschitz constant must be positive");
  DualState st;
  st.lambda = Eigen::VectorXd::Zero(n_users);
  st.u = Eigen::VectorXd::Zero(n_users);
  st.v = Eigen::VectorXd::Zero(n_users);
  st.grad_accum = Eigen::VectorXd::Zero(n_users);
  st.iter = 0;
  st.lipschitz = lipschitz;
  return st;
}

void dual_step(DualState& st, const Eigen::VectorXd& dg) {
  require(dg.size() == st.lambda.size(), "dual_step: gradient size mismatch");
  require(st.lipschitz > 0.0, "dual_step: Lipschitz constant must be positive");
  const double inv_l = 1.0 / st.lipschitz;
  const int i = st.iter;
  st.u = (dg * inv_l + st.lambda).cwiseMax(0.0);
  st.grad_accum += ((i + 1) / 2.0) * dg;
  st.v = (st.grad_accum * inv_l).cwiseMax(0.0);
  st.lambda = ((i + 1.0) * st.u + 2.0 * st.v) / (i + 3.0);
  st.iter = i + 1;
}

double prox_diameter_sum(const Scenario& sc) {
  double acc = 0.0;
  for (int k = 0; k < sc.n_tones; ++k) acc += 0.5 * sc.box_max(k).squaredNorm();
  return acc;
}

double smoothness_c_for(const Scenario& sc, double epsilon) {
  require(epsilon > 0.0, "smoothness_c_for: epsilon must be positive");
  const double d = prox_diameter_sum(sc);
  require(d > 0.0, "smoothness_c_for: box has zero diameter");
  return epsilon / d;
}

double imax_real(const Scenario& sc, double epsilon) {
  require(epsilon > 0.0, "imax_real: epsilon must be positive");
  // Σ_k 1/σ_k = K for the quadratic prox with unit convexity parameter.
  return 2.0 * std::sqrt(sc.n_tones * prox_diameter_sum(sc)) / epsilon - 1.0;
}

int theorem2_imax(const Scenario& sc, double epsilon) {
  return std::max(0, static_cast<int>(std::ceil(imax_real(sc, epsilon))));
}

double theorem2_violation_bound(double epsilon, double lambda_star_norm) {
  return epsilon * (lambda_star_norm +
                    std::sqrt(lambda_star_norm * lambda_star_norm + 2.0));
}

double objective_scale(const Scenario& sc, const PertoneOptions& opt,
                       const ConvexApprox* approx) {
  return std::abs(dual_value(sc, Eigen::VectorXd::Zero(sc.n_users),
                             ProxConfig::off(), opt, approx));
}

namespace {

struct Resolved {
  double epsilon = 0.0;
  double epsilon_a = 0.0;
  double feas_tol = 0.0;
};

Resolved resolve_tolerances(const Scenario& sc, const SolverConfig& cfg,
                            const PertoneOptions& opt,
                            const ConvexApprox* approx, bool need_epsilon) {
  Resolved r;
  double scale = 0.0;
  const bool want_auto =
      (need_epsilon && cfg.epsilon <= 0.0) || cfg.epsilon_a <= 0.0;
  if (want_auto) scale = objective_scale(sc, opt, approx);
  r.epsilon = cfg.epsilon > 0.0 ? cfg.epsilon : 1e-3 * scale;
  r.epsilon_a = cfg.epsilon_a > 0.0 ? cfg.epsilon_a : 5e-4 * scale;
  r.feas_tol = 1e-12 * (1.0 + sc.budget_mw.cwiseAbs().maxCoeff());
  if (need_epsilon) {
    require(r.epsilon > 0.0, "solver: resolved epsilon is not positive");
  }
  require(r.epsilon_a > 0.0, "solver: resolved epsilon_a is not positive");
  return r;
}

Eigen::VectorXd initial_lambda(const Scenario& sc, const SolverConfig& cfg) {
  if (cfg.lambda0.size() == 0) return Eigen::VectorXd::Zero(sc.n_users);
  require(cfg.lambda0.size() == sc.n_users, "solver: lambda0 size mismatch");
  require((cfg.lambda0.array() >= 0.0).all(), "solver: lambda0 negative");
  return cfg.lambda0;
}

// In-loop interleaving: any tied per-tone optimum is a valid maximizer,
// so the rotated selection's totals are an equally valid gradient choice.
// Rotating inside the loop is what lets the complementarity residuals
// settle when optima are tied across a symmetric subset of users; a
// fixed deterministic pick would hand one user the whole subset's power
// every iteration.
void maybe_interleave(const SolverConfig& cfg, DualSweep& sw) {
  if (!cfg.interleave || !reports_ties(cfg.pertone.kind)) return;
  SpectrumAllocation il = recover_interleaved(sw.pertone);
  sw.totals = il.user_totals();
  sw.alloc = std::move(il);
}

SpectrumAllocation recover_primal(const SolverConfig& cfg, bool averaged,
                                  const PrimalAverage& avg,
                                  const DualSweep& final_sweep) {
  // The averaged iterates already contain the per-iteration interleaved
  // selections (maybe_interleave runs before the accumulator), so the
  // averaging request takes precedence; otherwise fall back to the final
  // sweep, rotated across its ties when interleaving is on.
  if (averaged && !avg.empty()) return avg.result();
  if (cfg.interleave && reports_ties(cfg.pertone.kind)) {
    return recover_interleaved(final_sweep.pertone);
  }
  return final_sweep.alloc;
}

void fill_primal_fields(const Scenario& sc, SolverReport& rep) {
  rep.primal_value = weighted_rate_sum(sc, rep.spectra);
  rep.violation_norm =
      positive_part_norm(rep.spectra.user_totals() - sc.budget_mw);
}

}  // namespace

SolverReport solve_subgradient(const Scenario& sc, const SolverConfig& cfg,
                               const ConvexApprox* approx) {
  const Timer timer;
  const ProxConfig prox = ProxConfig::off();
  const Resolved tol =
      resolve_tolerances(sc, cfg, cfg.pertone, approx, /*need_epsilon=*/false);
  const StopRule stop{tol.epsilon_a, tol.feas_tol, 1e-3 * sc.budget_mw};
  const int budget = cfg.i_max > 0 ? cfg.i_max : 500;
  const bool averaged = cfg.primal_averaged.value_or(false);

  SolverReport rep;
  rep.i_max = budget;
  rep.trace.reserve(static_cast<std::size_t>(budget));

  Eigen::VectorXd lambda = initial_lambda(sc, cfg);
  Eigen::VectorXd step_sizes;  // adaptive rule, per user
  Eigen::VectorXd prev_dg;
  double q = cfg.q;
  PrimalAverage avg;
  SpectrumAllocation warm;
  DualSweep sweep;

  for (int i = 0; i < budget; ++i) {
    sweep = dual_sweep(sc, lambda, prox, cfg.pertone, approx,
                       warm.n_tones() > 0 ? &warm : nullptr);
    maybe_interleave(cfg, sweep);
    const Eigen::VectorXd dg = sweep.totals - sc.budget_mw;
    rep.trace.push_back({i, sweep.value, positive_part_norm(dg),
                         max_complementarity(lambda, dg), lambda});
    if (averaged) avg.add(i, sweep.alloc);
    rep.iterations = i + 1;

    if (stop.satisfied(i, lambda, dg)) {
      rep.converged = true;
      break;
    }

    if (q <= 0.0) {
      // Auto scale: make the first step move λ to the multiplier scale
      // |g(0)| / ‖P^tot‖₁ implied by the objective and budget units.
      const double lambda_scale =
          std::abs(sweep.value) / std::max(sc.budget_mw.sum(), 1e-300);
      q = lambda_scale / std::max(dg.cwiseAbs().maxCoeff(), 1e-300);
    }
    if (cfg.stepsize_rule == StepsizeRule::decreasing) {
      lambda = (lambda + (q / (i + 1.0)) * dg).cwiseMax(0.0);
    } else {
      if (step_sizes.size() == 0) {
        step_sizes = Eigen::VectorXd::Constant(sc.n_users, q);
      } else {
        for (int n = 0; n < sc.n_users; ++n) {
          // Residual sign flip means the step overshot: halve. Otherwise
          // grow gently. Documented stand-in for the uncited original.
          const bool flipped = prev_dg(n) * dg(n) < 0.0;
          step_sizes(n) *= flipped ? 0.5 : 1.1;
        }
      }
      lambda = (lambda + step_sizes.cwiseProduct(dg)).cwiseMax(0.0);
    }
    prev_dg = dg;
    warm = sweep.alloc;
  }

  if (!rep.converged) rep.note = "iteration budget exhausted";
  rep.lambda_hat = rep.trace.back().lambda;
  rep.dual_value = sweep.value;
  rep.spectra = recover_primal(cfg, averaged, avg, sweep);
  fill_primal_fields(sc, rep);
  rep.wall_time_s = timer.seconds();
  return rep;
}

SolverReport solve_improved(const Scenario& sc, const SolverConfig& cfg,
                            const ConvexApprox* approx) {
  const Timer timer;
  const bool convex_mode = approx != nullptr;
  const Resolved tol =
      resolve_tolerances(sc, cfg, cfg.pertone, approx, /*need_epsilon=*/true);

  const double c = smoothness_c_for(sc, tol.epsilon);
  const double lipschitz = sc.n_tones / c;
  const ProxConfig prox = ProxConfig::with_c(c);

  int i_max = cfg.i_max;
  if (i_max <= 0) {
    const double formula = imax_real(sc, tol.epsilon);
    if (convex_mode) {
      i_max = std::max(0, static_cast<int>(std::ceil(formula)));
    } else {
      // The direct variant has no worst-case guarantee, and the formula
      // count is unit-sensitive (it can collapse to a handful of
      // iterations when rates are large relative to per-tone powers).
      // Give it ten times the prescription with a generous floor and
      // report non-convergence honestly.
      i_max = std::max(500, static_cast<int>(std::ceil(10.0 * (formula + 1.0))));
    }
  }

  SolverReport rep;
  rep.epsilon = tol.epsilon;
  rep.smoothness_c = c;
  rep.lipschitz = lipschitz;
  rep.i_max = i_max;
  rep.trace.reserve(static_cast<std::size_t>(i_max) + 1);

  DualState st = DualState::init(sc.n_users, lipschitz);
  st.lambda = initial_lambda(sc, cfg);
  const StopRule stop{tol.epsilon_a, tol.feas_tol, 1e-3 * sc.budget_mw};
  const bool averaged = cfg.primal_averaged.value_or(convex_mode);
  PrimalAverage avg;
  SpectrumAllocation warm;
  DualSweep sweep;
  bool stopped = false;

  for (int i = 0; i <= i_max; ++i) {
    sweep = dual_sweep(sc, st.lambda, prox, cfg.pertone, approx,
                       warm.n_tones() > 0 ? &warm : nullptr);
    maybe_interleave(cfg, sweep);
    const Eigen::VectorXd dg = sweep.totals - sc.budget_mw;
    rep.trace.push_back({i, sweep.value, positive_part_norm(dg),
                         max_complementarity(st.lambda, dg), st.lambda});
    if (averaged) avg.add(i, sweep.alloc);
    rep.iterations = i + 1;

    if (!convex_mode && stop.satisfied(i, st.lambda, dg)) {
      // Stop on the complementarity test with the consistent pair
      // (λ^i, s^{i+1}): the returned multipliers are the ones the final
      // per-tone solves actually saw.
      rep.converged = true;
      rep.lambda_hat = st.lambda;
      stopped = true;
      break;
    }
    warm = sweep.alloc;
    dual_step(st, dg);
  }

  if (convex_mode) {
    // The prescribed schedule ran to completion; the duality-gap bound
    // holds by construction.
    rep.converged = true;
    rep.lambda_hat = st.lambda;  // λ^{i_max+1}
    rep.dual_value =
        dual_value(sc, rep.lambda_hat, prox, cfg.pertone, approx);
  } else {
    if (!stopped) {
      rep.note = "iteration budget exhausted before complementarity stop";
      rep.lambda_hat = rep.trace.back().lambda;
    }
    rep.dual_value = sweep.value;
  }

  rep.spectra = recover_primal(cfg, averaged, avg, sweep);
  fill_primal_fields(sc, rep);
  rep.wall_time_s = timer.seconds();
  return rep;
}

SolverReport solve_ica_dsb(const Scenario& sc, const SolverConfig& cfg) {
  const Timer timer;
  require(cfg.outer_max >= 1, "solve_ica_dsb: outer budget must be >= 1");

  SpectrumAllocation expansion = flat_start(sc);
  SolverConfig inner = cfg;
  inner.interleave = false;  // surrogate per-tone optima are unique

  if (inner.epsilon <= 0.0 || inner.epsilon_a <= 0.0 || inner.i_max <= 0) {
    const ConvexApprox probe = build_approx(sc, expansion);
    const double scale = objective_scale(sc, inner.pertone, &probe);
    if (inner.epsilon <= 0.0) inner.epsilon = 1e-3 * scale;
    if (inner.epsilon_a <= 0.0) inner.epsilon_a = 5e-4 * scale;
    if (inner.i_max <= 0) {
      inner.i_max = std::max(theorem2_imax(sc, inner.epsilon), 100);
    }
  }

  SolverReport rep;
  SolverReport last_inner;
  double prev_obj = 0.0;
  bool have_prev = false;
  int total_iters = 0;

  for (int outer = 0; outer < cfg.outer_max; ++outer) {
    const ConvexApprox approx = build_approx(sc, expansion);
    last_inner = solve_improved(sc, inner, &approx);
    total_iters += last_inner.iterations;
    expansion = last_inner.spectra;

    const double obj = weighted_rate_sum(sc, expansion);
    rep.outer_objective.push_back(obj);
    if (have_prev && std::abs(obj - prev_obj) <=
                         cfg.outer_rel_tol * std::max(std::abs(obj), 1e-300)) {
      rep.converged = true;
      break;
    }
    prev_obj = obj;
    have_prev = true;
    if (cfg.outer_warm_lambda) inner.lambda0 = last_inner.lambda_hat;
  }

  rep.trace = std::move(last_inner.trace);
  rep.spectra = std::move(expansion);
  rep.lambda_hat = std::move(last_inner.lambda_hat);
  rep.iterations = total_iters;
  rep.dual_value = last_inner.dual_value;
  rep.epsilon = inner.epsilon;
  rep.smoothness_c = last_inner.smoothness_c;
  rep.lipschitz = last_inner.lipschitz;
  rep.i_max = last_inner.i_max;
  if (!rep.converged) rep.note = "outer approximation budget exhausted";
  fill_primal_fields(sc, rep);
  rep.wall_time_s = timer.seconds();
  return rep;
}

SpectrumAllocation recover_interleaved(
    const std::vector<PerToneSolution>& pertone) {
  SpectrumAllocation out;
  out.tones.reserve(pertone.size());
  for (std::size_t k0 = 0; k0 < pertone.size(); ++k0) {
    const auto& ties = pertone[k0].optima;
    require(!ties.empty(), "recover_interleaved: empty tie set");
    // Tone number k = k0+1 is 1-based; pick 1-based element rem(k,|C|)+1.
    out.tones.push_back(ties[(k0 + 1) % ties.size()]);
  }
  return out;
}

}  // namespace spectra
