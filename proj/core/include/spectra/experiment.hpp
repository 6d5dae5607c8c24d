#pragma once

#include <string>
#include <vector>

#include "spectra/dual.hpp"
#include "spectra/model.hpp"

namespace spectra {

/// One labeled solver configuration inside an experiment.
struct SolverChoice {
  std::string name;    // label, used in output file names
  std::string method;  // subgradient | improved-direct | ica-dsb
  SolverConfig config;
};

/// A comparative run: one scenario, several solvers, one output directory.
struct ExperimentSpec {
  std::string scenario;  // preset name or scenario JSON path
  std::vector<SolverChoice> solvers;
  std::string output_dir = "experiment-out";
  unsigned seed = 0;  // recorded for provenance; every scheme is deterministic
  // Parallel solver runs (1 = sequential). Each run writes to its own
  // files, so outputs are byte-identical for any job count.
  int jobs = 1;
};

struct SolverRunRecord {
  std::string name;
  std::string method;
  bool ok = false;
  std::string error;        // set when !ok
  SolverReport report;      // valid when ok
  std::string trace_path;   // emitted files, empty when !ok
  std::string spectra_path;
};

struct ExperimentResult {
  std::vector<SolverRunRecord> runs;
  std::string summary_path;
};

/// Preset name -> preset(); anything else is read as a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

/// exhaustive | isb | fixedpoint | multistart | concave-exact.
PerToneSolverKind parse_pertone_kind(const std::string& name);
std::string pertone_kind_name(PerToneSolverKind kind);

/// Runs the solver a SolverChoice describes on an in-memory scenario.
SolverReport run_solver(const Scenario& sc, const SolverChoice& choice);

/// Runs every solver in the spec; a solver that throws is recorded as
/// failed and the run continues. Writes per-solver trace and spectra CSVs
/// plus summary.json into spec.output_dir. CSV content is deterministic;
/// wall-clock time appears only in the summary JSON.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Parses an experiment config JSON file (see README for the schema).
ExperimentSpec load_experiment_spec(const std::string& path);

/// Certificate check for the fixed-schedule smoothed-dual run on a frozen
/// concave surrogate: duality gap <= epsilon, and the constraint-violation
/// norm below its closed-form bound. `violation_bound` is the
/// pre-substitution form (‖λ*‖+√(‖λ*‖²+ε(i+1)²/(2L_c)))·4L_c/(i+1)²,
/// which is exact for the integer iteration count actually run;
/// `violation_bound_normalized` is the ε(‖λ*‖+√(‖λ*‖²+2)) closed form,
/// meaningful when the scenario is expressed in normalized units.
struct Theorem2Record {
  bool pass = false;
  bool gap_pass = false;
  bool violation_pass = false;
  double epsilon = 0.0;
  double smoothness_c = 0.0;
  double lipschitz = 0.0;
  int i_max = 0;
  double gap_measured = 0.0;
  double gap_bound = 0.0;  // = epsilon
  double violation_measured = 0.0;
  double violation_bound = 0.0;
  double violation_bound_normalized = 0.0;
  double lambda_star_norm = 0.0;
  std::string detail;  // measured-vs-bound text, filled on failure too
};

Theorem2Record verify_theorem2(const Scenario& sc, double epsilon);

}  // namespace spectra
