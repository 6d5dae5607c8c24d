#pragma once

#include <cmath>

namespace spectra {

// All internal computation runs in linear units: powers in mW per tone,
// channel gains as linear power ratios. dB / dBm / dBm-per-Hz appear only
// at configuration and file boundaries.

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// PSD in dBm/Hz to per-tone power in mW given the tone spacing.
inline double dbm_hz_to_mw_per_tone(double dbm_hz, double tone_spacing_hz) {
  return dbm_to_mw(dbm_hz) * tone_spacing_hz;
}

/// Per-tone power in mW back to PSD in dBm/Hz. Zero power maps to -inf.
inline double mw_per_tone_to_dbm_hz(double mw, double tone_spacing_hz) {
  return mw_to_dbm(mw / tone_spacing_hz);
}

}  // namespace spectra
