#pragma once

#include <string>
#include <vector>

#include "spectra/dual.hpp"
#include "spectra/model.hpp"
#include "spectra/synth.hpp"

namespace spectra {

// Scenario files are JSON in engineering units (dB, dBm, dBm/Hz); the
// in-memory Scenario is linear (mW per tone). ScenarioDoc mirrors the file
// verbatim so that load -> save -> load preserves every number bit-exactly;
// the dB <-> linear conversion happens exactly once, in scenario_from_doc /
// doc_from_scenario.

/// dB-domain stand-in for linear zero. JSON cannot carry -inf, so a gain or
/// mask of exactly 0 mW is written as this value, and anything at or below
/// it loads back as exactly 0.0 (the power-of-ten underflows to zero well
/// before this point).
inline constexpr double kZeroDb = -1.0e9;

/// Verbatim image of an explicit scenario file.
struct ScenarioDoc {
  struct Constants {
    double gamma_db = 0.0;
    double tone_spacing_hz = 1.0;
    double symbol_rate_hz = 1.0;
  };
  struct User {
    double budget_dbm = 0.0;
    double weight = 1.0;
  };
  struct Tone {
    std::vector<std::vector<double>> gains_sq_db;  // N rows x N cols
    std::vector<double> noise_dbm_hz;              // N
    std::vector<double> mask_dbm_hz;               // N
  };

  Constants constants;
  std::vector<User> users;
  std::vector<Tone> tones;
};

/// Unit conversion doc -> linear Scenario. Validates the result.
Scenario scenario_from_doc(const ScenarioDoc& doc);

/// Unit conversion linear Scenario -> doc (zero gain/mask becomes kZeroDb).
ScenarioDoc doc_from_scenario(const Scenario& sc);

/// Parses an explicit scenario file. Raises std::runtime_error naming the
/// offending field path on schema violations.
ScenarioDoc load_scenario_doc(const std::string& path);

/// Parses either an explicit scenario or a {"synthetic": {...}} file and
/// returns the linear Scenario.
Scenario load_scenario(const std::string& path);

/// Writes the explicit JSON form (synthetic inputs are materialized).
void save_scenario(const Scenario& sc, const std::string& path);
void save_scenario_doc(const ScenarioDoc& doc, const std::string& path);

/// Parses the {"synthetic": ...} parameter object (the value, not the
/// wrapper) from JSON text.
SynthSpec synth_spec_from_json(const std::string& json_text);

/// Spectra CSV: header "tone_index,user_1_dbm_hz,...", one row per tone,
/// powers as PSD in dBm/Hz; exact zero power prints as -inf. Numbers are
/// printed with round-trip precision.
void save_spectra_csv(const SpectrumAllocation& alloc, double tone_spacing_hz,
                      const std::string& path);

/// Reads a spectra CSV back into per-tone mW (row order = tone order).
SpectrumAllocation load_spectra_csv(const std::string& path,
                                    double tone_spacing_hz);

/// Trace CSV: columns iter,dual_value,violation_norm,max_complementarity,
/// lambda_1..lambda_N.
void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace spectra
