#include "spectra/presets.hpp"

#include <stdexcept>

namespace spectra {
namespace {

// Band plans.
//
// ADSL downstream: DMT tones 32..255 of a 256-tone grid (138 kHz to
// 1.104 MHz), i.e. everything above the upstream band. 224 used tones.
//
// VDSL upstream: bands US0/US1/US2 of the 4096-tone 998-style band plan,
//   US0:  25 kHz .. 138 kHz   -> tones    6..32    (27 tones)
//   US1: 3.75 MHz .. 5.2 MHz  -> tones  870..1205  (336 tones)
//   US2: 8.5 MHz .. 12 MHz    -> tones 1972..2782  (811 tones)
// for 1174 used tones total. The long lines only reach the low band while
// short lines dominate US2, which is what makes the near-far and
// symmetric-crosstalker topologies below stress spectrum coordination.
constexpr double kToneSpacingHz = 4312.5;

std::vector<Band> adsl_down_bands() {
  return {{32 * kToneSpacingHz, 255 * kToneSpacingHz}};
}

std::vector<Band> vdsl_up_bands() {
  return {{25e3, 138e3}, {3.75e6, 5.2e6}, {8.5e6, 12e6}};
}

// Spectral masks keep the per-tone box physically scaled (without one, a
// single tone could legally carry the whole budget, which distorts the
// smoothing diameters and the dual geometry). Both values leave the mask
// sum comfortably above the power budget so the budget, not the mask, is
// the binding constraint. The ADSL value sits a little above the
// budget-flat level (budget/K = -38.5 dBm/Hz), so a power-hungry user is
// mask-limited per tone but budget-limited in total; the VDSL value lets
// a short line soak up roughly three users' budgets across the high band,
// which the symmetric-crosstalker topology needs.
constexpr double kAdslMaskDbmHz = -38.0;
constexpr double kVdslMaskDbmHz = -48.0;

SynthSpec base_spec(std::vector<double> lengths, std::vector<Band> bands,
                    double budget_dbm, double mask_dbm_hz) {
  SynthSpec spec;
  spec.line_lengths_m = std::move(lengths);
  spec.bands_hz = std::move(bands);
  spec.tone_spacing_hz = kToneSpacingHz;
  spec.symbol_rate_hz = 4000.0;
  spec.gamma_db = 12.9;
  spec.budget_dbm = Eigen::VectorXd::Constant(1, budget_dbm);
  spec.noise_dbm_hz = -140.0;
  spec.mask_dbm_hz = mask_dbm_hz;
  // weights default to 1/N
  return spec;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"adsl-nearfar-2", "vdsl-up-4", "vdsl-up-6", "vdsl-up-6sym"};
}

SynthSpec preset_spec(const std::string& name) {
  // Per-user total power: 11.5 dBm for VDSL, 20.4 dBm for ADSL.
  if (name == "adsl-nearfar-2") {
    // Near-far downstream bundle: a 3000 m exchange-fed line next to a
    // 600 m cabinet-fed line. The short line's transmitter overwhelms the
    // long line's far end unless it backs off. The short line carries the
    // larger weight: with equal weights the marginal own-rate gain and the
    // marginal damage to the neighbour cancel almost exactly on
    // crosstalk-dominated tones, leaving total powers indifferent and the
    // budget constraint barely active; the 0.3/0.7 split makes the short
    // line power-hungry so its budget binds with a healthy margin and the
    // dual problem is well-conditioned.
    SynthSpec spec =
        base_spec({3000.0, 600.0}, adsl_down_bands(), 20.4, kAdslMaskDbmHz);
    spec.weights = Eigen::VectorXd(2);
    spec.weights << 0.3, 0.7;
    return spec;
  }
  if (name == "vdsl-up-4") {
    // Two far users (1200 m) and two near users (300 m). The 300 m pair
    // are symmetric crosstalkers in the high band.
    return base_spec({1200.0, 1200.0, 300.0, 300.0}, vdsl_up_bands(), 11.5,
                     kVdslMaskDbmHz);
  }
  if (name == "vdsl-up-6") {
    return base_spec({1200.0, 1000.0, 800.0, 600.0, 450.0, 300.0},
                     vdsl_up_bands(), 11.5, kVdslMaskDbmHz);
  }
  if (name == "vdsl-up-6sym") {
    // Three long lines plus three identical 300 m lines whose mutual
    // coupling is boosted so that in the high band at most one of them
    // can transmit per tone: the per-tone optimum is then three-way tied
    // and primal recovery needs the interleaving step.
    SynthSpec spec = base_spec({1200.0, 900.0, 600.0, 300.0, 300.0, 300.0},
                               vdsl_up_bands(), 11.5, kVdslMaskDbmHz);
    const int n = spec.n_users();
    spec.coupling_scale = Eigen::MatrixXd::Ones(n, n);
    for (int a = 3; a < 6; ++a) {
      for (int b = 3; b < 6; ++b) {
        if (a != b) spec.coupling_scale(a, b) = 40.0;
      }
    }
    return spec;
  }
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected one of adsl-nearfar-2, vdsl-up-4, "
                              "vdsl-up-6, vdsl-up-6sym)");
}

Scenario preset(const std::string& name) {
  return synth_scenario(preset_spec(name));
}

}  // namespace spectra
