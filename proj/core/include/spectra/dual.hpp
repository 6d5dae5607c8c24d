#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spectra/convex_approx.hpp"
#include "spectra/grid.hpp"
#include "spectra/model.hpp"
#include "spectra/pertone.hpp"

namespace spectra {

/// Which per-tone maximizer the master solver calls each iteration.
enum class PerToneSolverKind {
  exhaustive,              // full grid enumeration, reports ties
  coordinate_descent,      // cyclic per-user grid search
  fixed_point,             // KKT fixed-point sweeps
  multistart_fixed_point,  // fixed point from 1+N starts, reports ties
  concave_exact,           // exact concave-surrogate maximizer
};

struct PertoneOptions {
  PerToneSolverKind kind = PerToneSolverKind::fixed_point;
  GridSpec grid{};        // discrete solvers
  TieConfig ties{};       // tie tolerance and enumeration cap
  int inner_iters = 3;    // plain fixed-point sweep count
  int multistart_iters = 50;
};

/// One full pass over the tones at a fixed multiplier vector.
struct DualSweep {
  double value = 0.0;                    // Σ_k max + λᵀP^tot
  Eigen::VectorXd totals;                // Σ_k s_k, per user
  SpectrumAllocation alloc;              // per-tone maximizers (best)
  std::vector<PerToneSolution> pertone;  // full solutions including ties
};

/// Evaluate every per-tone subproblem at λ. With a frozen `approx` the
/// subproblems maximize the concave surrogate; otherwise the true
/// objective. `warm` optionally seeds iterative per-tone solvers with a
/// previous allocation.
DualSweep dual_sweep(const Scenario& sc, const Eigen::VectorXd& lambda,
                     const ProxConfig& prox, const PertoneOptions& opt,
                     const ConvexApprox* approx = nullptr,
                     const SpectrumAllocation* warm = nullptr);

/// Dual objective g(λ) (prox off) or its smoothed variant ḡ(λ) (prox on).
double dual_value(const Scenario& sc, const Eigen::VectorXd& lambda,
                  const ProxConfig& prox, const PertoneOptions& opt,
                  const ConvexApprox* approx = nullptr);

/// Constraint residual Σ_k s_k(λ) − P^tot at a per-tone maximizer
/// selection. This is the multiplier update direction; for the smoothed
/// dual it is exact and equals −∇ḡ(λ) (the dual is minimized, so updates
/// move λ along it).
Eigen::VectorXd dual_subgradient(const Scenario& sc,
                                 const Eigen::VectorXd& lambda,
                                 const ProxConfig& prox,
                                 const PertoneOptions& opt,
                                 const ConvexApprox* approx = nullptr);

/// Multiplier state of the optimal-gradient scheme.
struct DualState {
  Eigen::VectorXd lambda;      // λ^i
  Eigen::VectorXd u;           // gradient-step point
  Eigen::VectorXd v;           // accumulated-gradient step point
  Eigen::VectorXd grad_accum;  // "tmp": Σ_j (j+1)/2 · dḡ^{j+1}
  int iter = 0;                // i
  double lipschitz = 0.0;      // L_c = K/c

  static DualState init(int n_users, double lipschitz);
};

/// One multiplier update:
///   u = [dg/L + λ]⁺;  tmp += (i+1)/2·dg;  v = [tmp/L]⁺;
///   λ = (i+1)/(i+3)·u + 2/(i+3)·v;  i += 1.
void dual_step(DualState& st, const Eigen::VectorXd& dg);

/// Σ_k D_k with D_k = ½‖min(mask_k, budget)‖² for d = ½‖s‖².
double prox_diameter_sum(const Scenario& sc);

/// Smoothing parameter c = ε / Σ_k D_k giving ḡ ≤ g ≤ ḡ + ε.
double smoothness_c_for(const Scenario& sc, double epsilon);

/// Real-valued iteration prescription: i_max + 1 = 2√(K·ΣD)/ε.
double imax_real(const Scenario& sc, double epsilon);

/// ⌈imax_real⌉ clamped to at least 0.
int theorem2_imax(const Scenario& sc, double epsilon);

/// Constraint-violation bound ε(‖λ*‖ + √(‖λ*‖² + 2)).
double theorem2_violation_bound(double epsilon, double lambda_star_norm);

enum class StepsizeRule {
  decreasing,  // δ_i = q / (i+1)
  adaptive,    // per-user: halve on residual sign flip, else grow 1.1x
};

struct SolverConfig {
  // Dual accuracy ε in objective units; <= 0 selects ε = 1e-3·|g(0)|.
  double epsilon = 0.0;
  // Complementarity stop tolerance; <= 0 selects ε_a = 5e-4·|g(0)|.
  double epsilon_a = 0.0;
  // Iteration budget; <= 0 selects the Theorem-2 prescription for the
  // convex mode and 10x the prescription (with a floor) for the others.
  int i_max = 0;
  StepsizeRule stepsize_rule = StepsizeRule::decreasing;
  double q = 0.0;  // subgradient initial stepsize; <= 0 = auto scale
  bool interleave = false;
  PertoneOptions pertone{};
  // Recovered primal: averaged iterates (Algorithm-1 default) or the
  // last iterate (direct default); unset keeps the per-mode default.
  std::optional<bool> primal_averaged;
  // Starting multipliers; empty selects λ⁰ = 0. Used by the outer
  // approximation loop to warm-start successive inner solves.
  Eigen::VectorXd lambda0;
  // Outer successive-approximation loop.
  int outer_max = 50;
  double outer_rel_tol = 1e-4;
  bool outer_warm_lambda = true;
};

struct TraceRow {
  int iter = 0;
  double dual_value = 0.0;
  double violation_norm = 0.0;       // ‖[Σs − P^tot]⁺‖
  double max_complementarity = 0.0;  // max_n |λ_n(P^n − P^{n,tot})|
  Eigen::VectorXd lambda;
};

struct SolverReport {
  std::vector<TraceRow> trace;
  SpectrumAllocation spectra;  // recovered ŝ
  Eigen::VectorXd lambda_hat;  // λ̂
  bool converged = false;
  int iterations = 0;
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  double primal_value = std::numeric_limits<double>::quiet_NaN();
  double violation_norm = std::numeric_limits<double>::quiet_NaN();
  // Smoothing actually used (zero when prox was off).
  double epsilon = 0.0;
  double smoothness_c = 0.0;
  double lipschitz = 0.0;
  int i_max = 0;
  double wall_time_s = 0.0;  // never written to deterministic outputs
  // True-objective value after each outer approximation refresh.
  std::vector<double> outer_objective;
  std::string note;
};

/// |g(λ=0)| evaluated prox-off: the scale used for relative tolerances.
double objective_scale(const Scenario& sc, const PertoneOptions& opt,
                       const ConvexApprox* approx = nullptr);

/// Classical projected subgradient λ ← [λ + δ·dg]⁺ with a decreasing or
/// adaptive stepsize. Runs on the true dual, or on the surrogate dual
/// when `approx` is given.
SolverReport solve_subgradient(const Scenario& sc, const SolverConfig& cfg,
                               const ConvexApprox* approx = nullptr);

/// Smoothed-dual optimal-gradient scheme. With `approx`: the convex
/// variant (fixed Theorem-2 schedule, weighted-average primal). Without:
/// the direct variant (complementarity stop, last-iterate primal).
SolverReport solve_improved(const Scenario& sc, const SolverConfig& cfg,
                            const ConvexApprox* approx = nullptr);

/// Outer successive-convex-approximation loop: freeze surrogate, solve
/// with the improved scheme, re-expand at the recovered primal; stops
/// when the true objective stalls.
SolverReport solve_ica_dsb(const Scenario& sc, const SolverConfig& cfg);

/// Tone-index rotation over tied per-tone optima: tone k (1-based)
/// takes element rem(k, |C_k|) + 1 (1-based) of its tie list.
SpectrumAllocation recover_interleaved(
    const std::vector<PerToneSolution>& pertone);

}  // namespace spectra
