#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "spectra/grid.hpp"
#include "spectra/model.hpp"

namespace spectra {

/// Smoothing term subtracted from the per-tone Lagrangian:
/// c · d(s) with d(s) = ½‖s‖² (convexity parameter 1, so the dual
/// gradient's Lipschitz constant is K/c).
struct ProxConfig {
  bool enabled = false;
  double smoothness_c = 0.0;

  static ProxConfig off() { return {}; }
  static ProxConfig with_c(double c);
  double c() const { return enabled ? smoothness_c : 0.0; }
};

/// All inputs a per-tone solve needs: one tone's channel, the user
/// weights, physical constants, and the per-user box upper bound
/// min(mask, budget) on this tone.
struct ToneRef {
  const ToneChannel* channel = nullptr;
  const Eigen::VectorXd* weights = nullptr;
  const PhysicalConstants* constants = nullptr;
  Eigen::VectorXd box;  // mW upper bounds, entrywise >= 0

  int n_users() const { return static_cast<int>(box.size()); }
};

ToneRef make_tone_ref(const Scenario& sc, int tone_index);

/// A maximizer plus every allocation whose value ties it within the
/// relative tolerance, in the solver's fixed deterministic order.
struct PerToneSolution {
  Eigen::VectorXd best;                // argmax found
  double value = 0.0;                  // objective at `best`
  std::vector<Eigen::VectorXd> optima; // all tied maximizers, best included
};

/// Tie collection and enumeration-size limits for exhaustive search.
struct TieConfig {
  double rel_tol = 1e-3;  // "within 99.9% of the maximum"
  std::uint64_t max_points = 2'000'000;
};

/// Per-tone surrogate coefficients for the KKT fixed-point update. Null
/// pointers select direct mode: linear coefficients a are recomputed from
/// the current allocation on every update instead of being frozen.
struct ApproxSlice {
  // a(n, m): linear-term coefficient of variable user n in receiver m's
  // surrogate expansion, nats-scaled (1/mW).
  const Eigen::MatrixXd* a = nullptr;
  // c(n): constant offset making the surrogate tight at its expansion
  // point; only needed when evaluating surrogate values.
  const Eigen::VectorXd* c_off = nullptr;

  bool direct() const { return a == nullptr; }
};

/// f_s · Σ_n w_n b_k^n(s): this tone's contribution to the weighted
/// rate sum, in bits/s.
double pertone_objective(const ToneRef& t, const Eigen::VectorXd& s);

/// pertone_objective − λᵀs − c·½‖s‖². Rejects negative multipliers.
double pertone_lagrangian(const ToneRef& t, const Eigen::VectorXd& s,
                          const Eigen::VectorXd& lambda,
                          const ProxConfig& prox);

/// Full grid enumeration (OSB-style) in ascending lexicographic order,
/// user 0 most significant. Collects every tied maximizer in
/// enumeration order. Throws if the grid exceeds ties.max_points.
PerToneSolution solve_exhaustive(const ToneRef& t, const PowerGrid& grid,
                                 const Eigen::VectorXd& lambda,
                                 const ProxConfig& prox,
                                 const TieConfig& ties = {});

/// Cyclic per-user grid search (ISB-style): maximize each user's level
/// holding the others fixed until a full sweep makes no change.
/// Singleton result.
PerToneSolution solve_coordinate_descent(const ToneRef& t,
                                         const PowerGrid& grid,
                                         const Eigen::VectorXd& lambda,
                                         const ProxConfig& prox,
                                         const Eigen::VectorXd* start = nullptr,
                                         int max_sweeps = 256);

/// Closed-form KKT fixed-point update of one user's power with every
/// other quantity held at `s_prev`. Prox contributes c·s to the
/// denominator; a non-positive denominator means the user's power is
/// effectively free, so the update saturates its box bound. Result
/// always lies in [0, box].
double fixed_point_update(const ToneRef& t, const Eigen::VectorXd& s_prev,
                          const Eigen::VectorXd& lambda,
                          const ProxConfig& prox, const ApproxSlice& approx,
                          int user);

/// Gauss-Seidel sweeps of fixed_point_update over users 0..N-1,
/// repeated inner_iters times (the reference inner count is 3).
/// Singleton result; value is the true per-tone Lagrangian in direct
/// mode and the surrogate Lagrangian when `approx` is frozen.
PerToneSolution solve_fixed_point(const ToneRef& t,
                                  const Eigen::VectorXd& lambda,
                                  const ProxConfig& prox,
                                  const ApproxSlice& approx,
                                  int inner_iters = 3,
                                  const Eigen::VectorXd* start = nullptr);

/// Fixed-point solve from 1+N deterministic starts (half-box flat start,
/// then each user alone at its box maximum). Distinct converged points
/// whose values tie within tie_rel_tol are all reported, in start order.
PerToneSolution solve_multistart_fixed_point(const ToneRef& t,
                                             const Eigen::VectorXd& lambda,
                                             const ProxConfig& prox,
                                             const ApproxSlice& approx,
                                             int inner_iters = 50,
                                             double tie_rel_tol = 1e-3);

/// Exact maximizer of the concave surrogate Lagrangian over the box via
/// cyclic coordinate ascent with per-coordinate bisection on the
/// monotone derivative. Requires a frozen ApproxSlice. Used where
/// gradient/duality-gap statements need the per-tone maximum solved to
/// high accuracy.
PerToneSolution solve_concave_exact(const ToneRef& t,
                                    const Eigen::VectorXd& lambda,
                                    const ProxConfig& prox,
                                    const ApproxSlice& approx,
                                    double tol = 1e-11, int max_sweeps = 400);

/// Surrogate per-tone value b_cvx(s) − λᵀs − c·½‖s‖² for a frozen slice.
double surrogate_pertone_lagrangian(const ToneRef& t, const ApproxSlice& approx,
                                    const Eigen::VectorXd& s,
                                    const Eigen::VectorXd& lambda,
                                    const ProxConfig& prox);

/// Surrogate per-tone objective b_cvx(s) for a frozen slice (bits/s).
double surrogate_pertone_objective(const ToneRef& t, const ApproxSlice& approx,
                                   const Eigen::VectorXd& s);

}  // namespace spectra
