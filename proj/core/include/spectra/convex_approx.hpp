#pragma once

#include <Eigen/Dense>

#include <vector>

#include "spectra/model.hpp"
#include "spectra/pertone.hpp"

namespace spectra {

/// Concave per-tone surrogate of the weighted bit-sum, frozen at an
/// expansion point: per user n,
///   b_cvx contribution = w_n f_s [ log2(Σ_m |h̃^{n,m}|² s^m + Γσ^n)
///                                  − Σ_{m≠n} a^{m,n} s^m − c^n ]
/// with |h̃| the Γ-modified gains, a the tangent slopes of the
/// interference log at the expansion point, and c^n the offset making
/// the surrogate equal the true objective there. Tangency of the linear
/// part above the concave interference log makes the surrogate a global
/// lower bound of the true objective over the box.
struct ConvexApprox {
  // a[k](m, n): slope for variable user m inside receiver n's term, 1/mW.
  std::vector<Eigen::MatrixXd> a;
  // c_off[k](n): constant offset (log2 units) for receiver n.
  std::vector<Eigen::VectorXd> c_off;
  // gains_mod[k](n, m) = |h̃_k^{n,m}|²: diagonal |h|², off-diagonal Γ|h|².
  std::vector<Eigen::MatrixXd> gains_mod;
  SpectrumAllocation expansion_point;

  int n_tones() const { return static_cast<int>(a.size()); }
  ApproxSlice slice(int k) const {
    return ApproxSlice{&a[static_cast<std::size_t>(k)],
                       &c_off[static_cast<std::size_t>(k)]};
  }
};

/// Freeze the surrogate at `expansion_point` (must lie in the box).
ConvexApprox build_approx(const Scenario& sc,
                          const SpectrumAllocation& expansion_point);

/// Surrogate per-tone objective b_cvx (bits/s) at allocation `s`.
double surrogate_objective(const Scenario& sc, const ConvexApprox& approx,
                           int tone_index, const Eigen::VectorXd& s);

/// Analytic gradient of the surrogate per-tone objective.
Eigen::VectorXd surrogate_gradient(const Scenario& sc,
                                   const ConvexApprox& approx, int tone_index,
                                   const Eigen::VectorXd& s);

/// Σ_k b_cvx(s_k): surrogate value of a full spectrum allocation.
double surrogate_total(const Scenario& sc, const ConvexApprox& approx,
                       const SpectrumAllocation& alloc);

/// Default outer-loop starting point: flat spectra min(mask, budget/K).
SpectrumAllocation flat_start(const Scenario& sc);

}  // namespace spectra
