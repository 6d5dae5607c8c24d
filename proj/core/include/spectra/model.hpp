#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace spectra {

/// Transmit powers of all users on a single tone, in mW.
using ToneAllocation = Eigen::VectorXd;

/// Per-system constants. snr_gap is linear (config accepts dB).
struct PhysicalConstants {
  double snr_gap = 1.0;          // Gamma, linear ratio >= 1
  double tone_spacing_hz = 1.0;  // Delta_f
  double symbol_rate_hz = 1.0;   // f_s

  void validate() const;
};

/// Channel state on one tone: squared channel magnitudes (linear power
/// ratios, row = receiver, col = transmitter) and per-user noise in mW.
struct ToneChannel {
  Eigen::MatrixXd gains_sq;  // N x N, diagonal = direct paths
  Eigen::VectorXd noise_mw;  // length N, > 0

  void validate() const;
};

/// Transmit spectra of all users across all tones.
struct SpectrumAllocation {
  std::vector<ToneAllocation> tones;  // K entries, each length N

  int n_tones() const { return static_cast<int>(tones.size()); }

  /// Total power per user in mW (sum over tones).
  Eigen::VectorXd user_totals() const;
};

/// Complete problem instance. Immutable after construction; evaluation
/// helpers below are pure and safe to call concurrently.
struct Scenario {
  int n_users = 0;
  int n_tones = 0;
  std::vector<ToneChannel> tones;  // K entries
  Eigen::VectorXd weights;         // length N, >= 0
  Eigen::VectorXd budget_mw;       // length N, > 0
  Eigen::MatrixXd mask_mw;         // K x N, >= 0
  PhysicalConstants constants;

  void validate() const;

  /// Per-user box upper bound on tone k: min(mask, total budget).
  Eigen::VectorXd box_max(int k) const;

  /// Sum over tones of min(mask, budget) per user; useful scale reference.
  Eigen::VectorXd box_totals() const;

  SpectrumAllocation zero_allocation() const;
};

/// Achievable bit loading of `user` on one tone in bits/Hz:
/// log2(1 + SINR / Gamma) with SINR built from the tone's gains and noise.
double bit_loading(const ToneChannel& tone, const ToneAllocation& power_mw,
                   int user, const PhysicalConstants& constants);

/// Total data rate of one user in bits/s: f_s * sum_k bit_loading.
double user_rate(const Scenario& sc, const SpectrumAllocation& alloc, int user);

/// sum_n w_n * user_rate(n), the quantity all solvers maximize.
double weighted_rate_sum(const Scenario& sc, const SpectrumAllocation& alloc);

/// True if 0 <= s <= mask holds on every tone (within `slack` mW).
bool within_box(const Scenario& sc, const SpectrumAllocation& alloc,
                double slack = 0.0);

/// Componentwise [sum_k s_k - P_tot]^+ in mW.
Eigen::VectorXd budget_violation(const Scenario& sc,
                                 const SpectrumAllocation& alloc);

}  // namespace spectra
