#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "spectra/model.hpp"

namespace spectra {

/// One contiguous frequency band; tones whose center k·Δf falls inside
/// [lo_hz, hi_hz] are used.
struct Band {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

/// Parametric bundle model for generating test scenarios:
///   direct path  |h^{n,n}(f)|² = 10^(−k_a·L_n·√(f/1 MHz)/10)
///   crosstalk    |h^{n,m}(f)|² = k_x·L_coup·(f/1 MHz)²·|h^{n,n}(f)|²·scale
/// with coupling length L_coup = min(L_n, L_m) and an optional per-pair
/// scale matrix. Background noise is a flat floor.
struct SynthSpec {
  std::vector<double> line_lengths_m;  // one per user, > 0
  std::vector<Band> bands_hz;          // non-empty
  double tone_spacing_hz = 4312.5;
  double symbol_rate_hz = 4000.0;
  double gamma_db = 12.9;
  Eigen::VectorXd budget_dbm;   // size N, or size 1 broadcast to all users
  Eigen::VectorXd weights;      // empty selects w_n = 1/N
  double noise_dbm_hz = -140.0;
  // NaN keeps the default mask (box capped by the budget alone).
  double mask_dbm_hz = std::numeric_limits<double>::quiet_NaN();
  double attenuation_db = 0.0105;  // k_a, dB per meter per √MHz
  double coupling_k = 9e-8;        // k_x, per meter
  Eigen::MatrixXd coupling_scale;  // N×N, empty selects all-ones

  int n_users() const { return static_cast<int>(line_lengths_m.size()); }
};

/// 10^(−k_a·L·√(f/1MHz)/10); equals 1 at zero length.
double direct_path_gain(double length_m, double f_hz, double k_a);

/// k_x·L_coup·(f/1MHz)² times the victim's direct-path gain.
double fext_coupling_gain(double coupling_m, double f_hz, double k_x,
                          double victim_direct_gain);

/// DMT tone indices covered by the band plan (sorted, deduplicated).
std::vector<int> band_tone_indices(const SynthSpec& spec);

/// Center frequencies of those tones, Hz.
std::vector<double> band_tone_frequencies(const SynthSpec& spec);

/// Deterministic scenario from the parametric model.
Scenario synth_scenario(const SynthSpec& spec);

}  // namespace spectra
