#include "spectra/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"
#include "spectra/units.hpp"

namespace spectra {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("scenario: " + path + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double need_number(const json& obj, const char* key, const std::string& path) {
  return as_number(need(obj, key, path), path + "." + key);
}

double opt_number(const json& obj, const char* key, const std::string& path,
                  double fallback) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

std::vector<double> as_number_array(const json& v, const std::string& path,
                                    int expect = -1) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  if (expect >= 0 && static_cast<int>(v.size()) != expect) {
    fail(path, "expected " + std::to_string(expect) + " entries, got " +
                   std::to_string(v.size()));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

/// Shortest decimal form that parses back to the same double.
void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& where) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{}) {
    throw std::runtime_error(where + ": cannot parse number '" + field + "'");
  }
  return v;
}

ScenarioDoc doc_from_json(const json& root) {
  ScenarioDoc doc;
  const json& constants = need(root, "constants", "$");
  doc.constants.gamma_db = need_number(constants, "gamma_db", "$.constants");
  doc.constants.tone_spacing_hz =
      need_number(constants, "tone_spacing_hz", "$.constants");
  doc.constants.symbol_rate_hz =
      need_number(constants, "symbol_rate_hz", "$.constants");

  const json& users = need(root, "users", "$");
  if (!users.is_array() || users.empty()) {
    fail("$.users", "expected a non-empty array");
  }
  const int n = static_cast<int>(users.size());
  for (int i = 0; i < n; ++i) {
    const std::string upath = "$.users[" + std::to_string(i) + "]";
    ScenarioDoc::User u;
    u.budget_dbm = need_number(users[i], "budget_dbm", upath);
    u.weight = need_number(users[i], "weight", upath);
    doc.users.push_back(u);
  }

  const json& tones = need(root, "tones", "$");
  if (!tones.is_array() || tones.empty()) {
    fail("$.tones", "expected a non-empty array");
  }
  for (std::size_t k = 0; k < tones.size(); ++k) {
    const std::string tpath = "$.tones[" + std::to_string(k) + "]";
    ScenarioDoc::Tone t;
    const json& gains = need(tones[k], "gains_sq_db", tpath);
    if (!gains.is_array() || static_cast<int>(gains.size()) != n) {
      fail(tpath + ".gains_sq_db",
           "expected " + std::to_string(n) + " rows (one per receiver)");
    }
    for (int r = 0; r < n; ++r) {
      t.gains_sq_db.push_back(as_number_array(
          gains[r], tpath + ".gains_sq_db[" + std::to_string(r) + "]", n));
    }
    t.noise_dbm_hz = as_number_array(need(tones[k], "noise_dbm_hz", tpath),
                                     tpath + ".noise_dbm_hz", n);
    t.mask_dbm_hz = as_number_array(need(tones[k], "mask_dbm_hz", tpath),
                                    tpath + ".mask_dbm_hz", n);
    doc.tones.push_back(std::move(t));
  }
  return doc;
}

json json_from_doc(const ScenarioDoc& doc) {
  json root;
  root["constants"] = {{"gamma_db", doc.constants.gamma_db},
                       {"tone_spacing_hz", doc.constants.tone_spacing_hz},
                       {"symbol_rate_hz", doc.constants.symbol_rate_hz}};
  json users = json::array();
  for (const auto& u : doc.users) {
    users.push_back({{"budget_dbm", u.budget_dbm}, {"weight", u.weight}});
  }
  root["users"] = std::move(users);
  json tones = json::array();
  for (const auto& t : doc.tones) {
    json tone;
    tone["gains_sq_db"] = t.gains_sq_db;
    tone["noise_dbm_hz"] = t.noise_dbm_hz;
    tone["mask_dbm_hz"] = t.mask_dbm_hz;
    tones.push_back(std::move(tone));
  }
  root["tones"] = std::move(tones);
  return root;
}

SynthSpec synth_spec_from(const json& syn, const std::string& path) {
  SynthSpec spec;
  spec.line_lengths_m =
      as_number_array(need(syn, "line_lengths_m", path), path + ".line_lengths_m");
  const int n = static_cast<int>(spec.line_lengths_m.size());

  const json& bands = need(syn, "bands_hz", path);
  if (!bands.is_array() || bands.empty()) {
    fail(path + ".bands_hz", "expected a non-empty array");
  }
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const std::string bpath = path + ".bands_hz[" + std::to_string(b) + "]";
    Band band;
    band.lo_hz = need_number(bands[b], "lo_hz", bpath);
    band.hi_hz = need_number(bands[b], "hi_hz", bpath);
    spec.bands_hz.push_back(band);
  }

  spec.tone_spacing_hz =
      opt_number(syn, "tone_spacing_hz", path, spec.tone_spacing_hz);
  spec.symbol_rate_hz =
      opt_number(syn, "symbol_rate_hz", path, spec.symbol_rate_hz);
  spec.gamma_db = opt_number(syn, "gamma_db", path, spec.gamma_db);
  spec.noise_dbm_hz = opt_number(syn, "noise_dbm_hz", path, spec.noise_dbm_hz);
  spec.mask_dbm_hz = opt_number(syn, "mask_dbm_hz", path, spec.mask_dbm_hz);
  spec.attenuation_db =
      opt_number(syn, "attenuation_db", path, spec.attenuation_db);
  spec.coupling_k = opt_number(syn, "coupling_k", path, spec.coupling_k);

  const json& budget = need(syn, "budget_dbm", path);
  std::vector<double> budgets;
  if (budget.is_number()) {
    budgets = {budget.get<double>()};
  } else {
    budgets = as_number_array(budget, path + ".budget_dbm");
  }
  spec.budget_dbm = Eigen::Map<Eigen::VectorXd>(budgets.data(),
                                                static_cast<long>(budgets.size()));

  if (syn.contains("weights")) {
    auto w = as_number_array(syn["weights"], path + ".weights", n);
    spec.weights = Eigen::Map<Eigen::VectorXd>(w.data(), n);
  }
  if (syn.contains("coupling_scale")) {
    const json& cs = syn["coupling_scale"];
    if (!cs.is_array() || static_cast<int>(cs.size()) != n) {
      fail(path + ".coupling_scale", "expected " + std::to_string(n) + " rows");
    }
    spec.coupling_scale.resize(n, n);
    for (int r = 0; r < n; ++r) {
      auto row = as_number_array(
          cs[r], path + ".coupling_scale[" + std::to_string(r) + "]", n);
      for (int c = 0; c < n; ++c) spec.coupling_scale(r, c) = row[c];
    }
  }
  return spec;
}

}  // namespace

Scenario scenario_from_doc(const ScenarioDoc& doc) {
  Scenario sc;
  sc.n_users = static_cast<int>(doc.users.size());
  sc.n_tones = static_cast<int>(doc.tones.size());
  sc.constants.snr_gap = db_to_linear(doc.constants.gamma_db);
  sc.constants.tone_spacing_hz = doc.constants.tone_spacing_hz;
  sc.constants.symbol_rate_hz = doc.constants.symbol_rate_hz;

  sc.weights.resize(sc.n_users);
  sc.budget_mw.resize(sc.n_users);
  for (int i = 0; i < sc.n_users; ++i) {
    sc.weights(i) = doc.users[i].weight;
    sc.budget_mw(i) = dbm_to_mw(doc.users[i].budget_dbm);
  }

  const double spacing = sc.constants.tone_spacing_hz;
  sc.mask_mw.resize(sc.n_tones, sc.n_users);
  for (int k = 0; k < sc.n_tones; ++k) {
    const auto& t = doc.tones[k];
    ToneChannel ch;
    ch.gains_sq.resize(sc.n_users, sc.n_users);
    ch.noise_mw.resize(sc.n_users);
    for (int r = 0; r < sc.n_users; ++r) {
      if (static_cast<int>(t.gains_sq_db.size()) != sc.n_users ||
          static_cast<int>(t.gains_sq_db[r].size()) != sc.n_users) {
        fail("$.tones[" + std::to_string(k) + "].gains_sq_db",
             "expected an N x N matrix");
      }
      for (int c = 0; c < sc.n_users; ++c) {
        ch.gains_sq(r, c) = db_to_linear(t.gains_sq_db[r][c]);
      }
      ch.noise_mw(r) = dbm_hz_to_mw_per_tone(t.noise_dbm_hz.at(r), spacing);
      sc.mask_mw(k, r) = dbm_hz_to_mw_per_tone(t.mask_dbm_hz.at(r), spacing);
    }
    sc.tones.push_back(std::move(ch));
  }
  sc.validate();
  return sc;
}

ScenarioDoc doc_from_scenario(const Scenario& sc) {
  ScenarioDoc doc;
  doc.constants.gamma_db = linear_to_db(sc.constants.snr_gap);
  doc.constants.tone_spacing_hz = sc.constants.tone_spacing_hz;
  doc.constants.symbol_rate_hz = sc.constants.symbol_rate_hz;
  for (int i = 0; i < sc.n_users; ++i) {
    ScenarioDoc::User u;
    u.budget_dbm = mw_to_dbm(sc.budget_mw(i));
    u.weight = sc.weights(i);
    doc.users.push_back(u);
  }
  const double spacing = sc.constants.tone_spacing_hz;
  auto to_db = [](double lin) { return lin == 0.0 ? kZeroDb : linear_to_db(lin); };
  auto to_dbm_hz = [&](double mw) {
    return mw == 0.0 ? kZeroDb : mw_per_tone_to_dbm_hz(mw, spacing);
  };
  for (int k = 0; k < sc.n_tones; ++k) {
    ScenarioDoc::Tone t;
    const ToneChannel& ch = sc.tones[k];
    for (int r = 0; r < sc.n_users; ++r) {
      std::vector<double> row;
      for (int c = 0; c < sc.n_users; ++c) row.push_back(to_db(ch.gains_sq(r, c)));
      t.gains_sq_db.push_back(std::move(row));
      t.noise_dbm_hz.push_back(to_dbm_hz(ch.noise_mw(r)));
      t.mask_dbm_hz.push_back(to_dbm_hz(sc.mask_mw(k, r)));
    }
    doc.tones.push_back(std::move(t));
  }
  return doc;
}

ScenarioDoc load_scenario_doc(const std::string& path) {
  return doc_from_json(read_json_file(path));
}

Scenario load_scenario(const std::string& path) {
  json root = read_json_file(path);
  if (root.is_object() && root.contains("synthetic")) {
    return synth_scenario(synth_spec_from(root["synthetic"], "$.synthetic"));
  }
  return scenario_from_doc(doc_from_json(root));
}

void save_scenario_doc(const ScenarioDoc& doc, const std::string& path) {
  write_text_file(path, json_from_doc(doc).dump(2) + "\n");
}

void save_scenario(const Scenario& sc, const std::string& path) {
  save_scenario_doc(doc_from_scenario(sc), path);
}

SynthSpec synth_spec_from_json(const std::string& json_text) {
  json syn;
  try {
    syn = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("synthetic spec: ") + e.what());
  }
  return synth_spec_from(syn, "$");
}

void save_spectra_csv(const SpectrumAllocation& alloc, double tone_spacing_hz,
                      const std::string& path) {
  const int n = alloc.tones.empty() ? 0 : static_cast<int>(alloc.tones[0].size());
  std::string out = "tone_index";
  for (int i = 0; i < n; ++i) {
    out += ",user_" + std::to_string(i + 1) + "_dbm_hz";
  }
  out += "\n";
  for (int k = 0; k < alloc.n_tones(); ++k) {
    out += std::to_string(k + 1);
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_double(out, mw_per_tone_to_dbm_hz(alloc.tones[k](i), tone_spacing_hz));
    }
    out += "\n";
  }
  write_text_file(path, out);
}

SpectrumAllocation load_spectra_csv(const std::string& path,
                                    double tone_spacing_hz) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  SpectrumAllocation alloc;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string field;
    bool first = true;
    const std::string where = path + ":" + std::to_string(lineno);
    while (std::getline(ss, field, ',')) {
      if (first) {
        first = false;  // tone_index column; row order defines the tone order
        continue;
      }
      fields.push_back(parse_double(field, where));
    }
    ToneAllocation s(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      s(static_cast<long>(i)) = dbm_hz_to_mw_per_tone(fields[i], tone_spacing_hz);
    }
    alloc.tones.push_back(std::move(s));
  }
  return alloc;
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::string out = "iter,dual_value,violation_norm,max_complementarity";
  const int n = trace.empty() ? 0 : static_cast<int>(trace[0].lambda.size());
  for (int i = 0; i < n; ++i) out += ",lambda_" + std::to_string(i + 1);
  out += "\n";
  for (const TraceRow& row : trace) {
    out += std::to_string(row.iter);
    out += ',';
    append_double(out, row.dual_value);
    out += ',';
    append_double(out, row.violation_norm);
    out += ',';
    append_double(out, row.max_complementarity);
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_double(out, row.lambda(i));
    }
    out += "\n";
  }
  write_text_file(path, out);
}

}  // namespace spectra
