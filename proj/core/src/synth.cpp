#include "spectra/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spectra/units.hpp"

namespace spectra {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double direct_path_gain(double length_m, double f_hz, double k_a) {
  const double atten_db = k_a * length_m * std::sqrt(f_hz / 1e6);
  return db_to_linear(-atten_db);
}

double fext_coupling_gain(double coupling_m, double f_hz, double k_x,
                          double victim_direct_gain) {
  const double f_mhz = f_hz / 1e6;
  return k_x * coupling_m * f_mhz * f_mhz * victim_direct_gain;
}

std::vector<int> band_tone_indices(const SynthSpec& spec) {
  require(!spec.bands_hz.empty(), "synth: band plan is empty");
  require(spec.tone_spacing_hz > 0.0, "synth: tone spacing must be positive");
  std::vector<int> indices;
  for (const Band& b : spec.bands_hz) {
    require(b.lo_hz >= 0.0 && b.hi_hz > b.lo_hz, "synth: malformed band");
    const int lo = static_cast<int>(std::ceil(b.lo_hz / spec.tone_spacing_hz));
    const int hi = static_cast<int>(std::floor(b.hi_hz / spec.tone_spacing_hz));
    for (int k = std::max(lo, 1); k <= hi; ++k) indices.push_back(k);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  require(!indices.empty(), "synth: band plan selects no tones");
  return indices;
}

std::vector<double> band_tone_frequencies(const SynthSpec& spec) {
  std::vector<double> freqs;
  for (int k : band_tone_indices(spec)) freqs.push_back(k * spec.tone_spacing_hz);
  return freqs;
}

Scenario synth_scenario(const SynthSpec& spec) {
  const int n = spec.n_users();
  require(n >= 1, "synth: at least one line required");
  for (double len : spec.line_lengths_m) {
    require(len > 0.0, "synth: line lengths must be positive");
  }
  require(spec.budget_dbm.size() == n || spec.budget_dbm.size() == 1,
          "synth: budget_dbm must have one entry or one per user");
  if (spec.weights.size() != 0) {
    require(spec.weights.size() == n, "synth: weights size mismatch");
  }
  if (spec.coupling_scale.size() != 0) {
    require(spec.coupling_scale.rows() == n && spec.coupling_scale.cols() == n,
            "synth: coupling_scale must be NxN");
  }

  const std::vector<double> freqs = band_tone_frequencies(spec);
  const int n_tones = static_cast<int>(freqs.size());

  Scenario sc;
  sc.n_users = n;
  sc.n_tones = n_tones;
  sc.constants.snr_gap = db_to_linear(spec.gamma_db);
  sc.constants.tone_spacing_hz = spec.tone_spacing_hz;
  sc.constants.symbol_rate_hz = spec.symbol_rate_hz;

  sc.weights = spec.weights.size() != 0
                   ? spec.weights
                   : Eigen::VectorXd::Constant(n, 1.0 / n);
  sc.budget_mw.resize(n);
  for (int u = 0; u < n; ++u) {
    const double dbm =
        spec.budget_dbm.size() == 1 ? spec.budget_dbm(0) : spec.budget_dbm(u);
    sc.budget_mw(u) = dbm_to_mw(dbm);
  }

  const bool masked = !std::isnan(spec.mask_dbm_hz);
  const double mask_mw =
      masked ? dbm_hz_to_mw_per_tone(spec.mask_dbm_hz, spec.tone_spacing_hz)
             : 0.0;
  sc.mask_mw.resize(n_tones, n);
  const double noise_mw =
      dbm_hz_to_mw_per_tone(spec.noise_dbm_hz, spec.tone_spacing_hz);

  sc.tones.reserve(static_cast<std::size_t>(n_tones));
  for (int k = 0; k < n_tones; ++k) {
    const double f = freqs[static_cast<std::size_t>(k)];
    ToneChannel ch;
    ch.gains_sq.resize(n, n);
    ch.noise_mw = Eigen::VectorXd::Constant(n, noise_mw);
    for (int rx = 0; rx < n; ++rx) {
      const double direct = direct_path_gain(
          spec.line_lengths_m[static_cast<std::size_t>(rx)], f,
          spec.attenuation_db);
      ch.gains_sq(rx, rx) = direct;
      for (int tx = 0; tx < n; ++tx) {
        if (tx == rx) continue;
        const double coup =
            std::min(spec.line_lengths_m[static_cast<std::size_t>(rx)],
                     spec.line_lengths_m[static_cast<std::size_t>(tx)]);
        double scale = 1.0;
        if (spec.coupling_scale.size() != 0) scale = spec.coupling_scale(rx, tx);
        ch.gains_sq(rx, tx) =
            fext_coupling_gain(coup, f, spec.coupling_k, direct) * scale;
      }
    }
    sc.tones.push_back(std::move(ch));
    for (int u = 0; u < n; ++u) {
      sc.mask_mw(k, u) = masked ? mask_mw : sc.budget_mw(u);
    }
  }

  sc.validate();
  return sc;
}

}  // namespace spectra
