// spectra-dd: command line front end for the spectrum-balancing toolkit.
//
// Verbs:
//   solve            run one dual-decomposition solver on a scenario
//   oracle           exact grid-search reference optimum (small instances)
//   preset           list or materialize built-in benchmark scenarios
//   experiment       run a multi-solver comparison from a config file
//   verify-theorem2  check the fixed-schedule accuracy certificate
//
// Exit status is 0 only when the requested run finishes and every
// requested assertion holds.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "spectra/experiment.hpp"
#include "spectra/oracle.hpp"
#include "spectra/presets.hpp"
#include "spectra/scenario_io.hpp"

namespace {

struct SolveArgs {
  std::string scenario;
  std::string solver = "improved-direct";
  std::string pertone;
  double epsilon = 0.0;
  double epsilon_a = 0.0;
  int i_max = 0;
  double q = 0.0;
  std::string stepsize = "decreasing";
  std::string interleave = "off";
  std::string primal;
  double grid_step_db = 1.0;
  double grid_floor_db = 60.0;
  double tie_rel_tol = 1e-3;
  int inner_iters = 3;
  int multistart_iters = 50;
  std::string trace_path;
  std::string spectra_path;
};

spectra::SolverChoice to_choice(const SolveArgs& a) {
  spectra::SolverChoice choice;
  choice.name = a.solver;
  choice.method = a.solver;
  spectra::SolverConfig& cfg = choice.config;
  cfg.epsilon = a.epsilon;
  cfg.epsilon_a = a.epsilon_a;
  cfg.i_max = a.i_max;
  cfg.q = a.q;
  cfg.stepsize_rule = a.stepsize == "adaptive"
                          ? spectra::StepsizeRule::adaptive
                          : spectra::StepsizeRule::decreasing;
  cfg.interleave = a.interleave == "on";
  if (!a.pertone.empty()) {
    cfg.pertone.kind = spectra::parse_pertone_kind(a.pertone);
  }
  cfg.pertone.grid.step_db = a.grid_step_db;
  cfg.pertone.grid.floor_db = a.grid_floor_db;
  cfg.pertone.ties.rel_tol = a.tie_rel_tol;
  cfg.pertone.inner_iters = a.inner_iters;
  cfg.pertone.multistart_iters = a.multistart_iters;
  if (a.primal == "averaged") cfg.primal_averaged = true;
  if (a.primal == "last") cfg.primal_averaged = false;
  return choice;
}

void add_solve_flags(CLI::App* cmd, SolveArgs& a) {
  cmd->add_option("--scenario", a.scenario,
                  "preset name or scenario JSON file")
      ->required();
  cmd->add_option("--solver", a.solver, "master solver")
      ->check(CLI::IsMember({"subgradient", "improved-direct", "ica-dsb"}))
      ->capture_default_str();
  cmd->add_option("--pertone", a.pertone,
                  "per-tone solver (default depends on --solver)")
      ->check(CLI::IsMember(
          {"exhaustive", "isb", "fixedpoint", "multistart", "concave-exact"}));
  cmd->add_option("--epsilon", a.epsilon,
                  "dual accuracy target; 0 = auto (1e-3 of |g(0)|)");
  cmd->add_option("--epsilon-a", a.epsilon_a,
                  "complementarity stop tolerance; 0 = auto");
  cmd->add_option("--i-max", a.i_max, "iteration budget; 0 = auto");
  cmd->add_option("--q", a.q, "subgradient initial stepsize; 0 = auto");
  cmd->add_option("--stepsize", a.stepsize, "subgradient stepsize rule")
      ->check(CLI::IsMember({"decreasing", "adaptive"}))
      ->capture_default_str();
  cmd->add_option("--interleave", a.interleave,
                  "rotate tied per-tone optima across tones")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--primal", a.primal,
                  "recovered primal: averaged iterates or the last one")
      ->check(CLI::IsMember({"averaged", "last"}));
  cmd->add_option("--grid-step-db", a.grid_step_db, "grid spacing in dB")
      ->capture_default_str();
  cmd->add_option("--grid-floor-db", a.grid_floor_db,
                  "grid dynamic range below the box top, in dB")
      ->capture_default_str();
  cmd->add_option("--tie-rel-tol", a.tie_rel_tol,
                  "relative closeness treated as a tied optimum")
      ->capture_default_str();
  cmd->add_option("--inner-iters", a.inner_iters,
                  "fixed-point sweeps per tone per iteration")
      ->capture_default_str();
  cmd->add_option("--multistart-iters", a.multistart_iters,
                  "fixed-point sweeps per start in multistart mode")
      ->capture_default_str();
  cmd->add_option("--trace", a.trace_path, "write iteration trace CSV here");
  cmd->add_option("--spectra", a.spectra_path, "write final spectra CSV here");
}

int run_solve(const SolveArgs& a) {
  const spectra::Scenario sc = spectra::resolve_scenario(a.scenario);
  const spectra::SolverChoice choice = to_choice(a);
  const spectra::SolverReport report = spectra::run_solver(sc, choice);
  if (!a.trace_path.empty()) spectra::save_trace_csv(report.trace, a.trace_path);
  if (!a.spectra_path.empty()) {
    spectra::save_spectra_csv(report.spectra, sc.constants.tone_spacing_hz,
                              a.spectra_path);
  }
  std::cout << "solver:          " << choice.method << "\n"
            << "converged:       " << (report.converged ? "yes" : "no") << "\n"
            << "iterations:      " << report.iterations << "\n"
            << "dual value:      " << report.dual_value << "\n"
            << "weighted rate:   " << report.primal_value << "\n"
            << "violation norm:  " << report.violation_norm << " mW\n";
  if (!report.outer_objective.empty()) {
    std::cout << "outer steps:     " << report.outer_objective.size() << "\n";
  }
  if (!report.note.empty()) std::cout << "note:            " << report.note << "\n";
  std::cerr << "wall time: " << report.wall_time_s << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-user spectrum balancing via dual decomposition"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "run one solver on a scenario");
  add_solve_flags(solve, solve_args);

  std::string oracle_scenario;
  double oracle_step_db = 1.0, oracle_floor_db = 60.0;
  std::string oracle_spectra;
  CLI::App* oracle =
      app.add_subcommand("oracle", "exact grid optimum by enumeration");
  oracle->add_option("--scenario", oracle_scenario, "preset name or JSON file")
      ->required();
  oracle->add_option("--grid-step-db", oracle_step_db, "grid spacing in dB")
      ->capture_default_str();
  oracle->add_option("--grid-floor-db", oracle_floor_db,
                     "grid dynamic range in dB")
      ->capture_default_str();
  oracle->add_option("--spectra", oracle_spectra, "write optimal spectra CSV");

  std::string preset_name, preset_out;
  bool preset_list = false;
  CLI::App* preset_cmd =
      app.add_subcommand("preset", "list or materialize built-in scenarios");
  preset_cmd->add_option("--name", preset_name, "preset to materialize");
  preset_cmd->add_option("--out", preset_out, "write scenario JSON here");
  preset_cmd->add_flag("--list", preset_list, "list preset names");

  std::string experiment_config;
  int experiment_jobs = 1;
  CLI::App* experiment =
      app.add_subcommand("experiment", "multi-solver comparison run");
  experiment->add_option("--config", experiment_config, "experiment JSON file")
      ->required();
  experiment
      ->add_option("--jobs", experiment_jobs,
                   "parallel solver runs (default 1 = sequential)")
      ->check(CLI::PositiveNumber);

  std::string verify_scenario;
  double verify_epsilon = 1e-2;
  CLI::App* verify = app.add_subcommand(
      "verify-theorem2", "check the fixed-schedule accuracy certificate");
  verify->add_option("--scenario", verify_scenario, "preset name or JSON file")
      ->required();
  verify->add_option("--epsilon", verify_epsilon, "accuracy target")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(solve_args);

    if (oracle->parsed()) {
      const spectra::Scenario sc = spectra::resolve_scenario(oracle_scenario);
      const auto grids =
          spectra::make_grids(sc, {oracle_floor_db, oracle_step_db});
      const spectra::OracleResult res = spectra::brute_force_cwrs(sc, grids);
      std::cout << "enumerated:     " << res.enumerated << "\n"
                << "weighted rate:  " << res.best_value << "\n";
      if (!oracle_spectra.empty()) {
        spectra::save_spectra_csv(res.best_alloc, sc.constants.tone_spacing_hz,
                                  oracle_spectra);
      }
      return 0;
    }

    if (preset_cmd->parsed()) {
      if (preset_list || preset_name.empty()) {
        for (const auto& name : spectra::preset_names()) {
          std::cout << name << "\n";
        }
        return 0;
      }
      const spectra::Scenario sc = spectra::preset(preset_name);
      std::cout << preset_name << ": " << sc.n_users << " users, "
                << sc.n_tones << " tones\n";
      if (!preset_out.empty()) {
        spectra::save_scenario(sc, preset_out);
        std::cout << "wrote " << preset_out << "\n";
      }
      return 0;
    }

    if (experiment->parsed()) {
      spectra::ExperimentSpec spec =
          spectra::load_experiment_spec(experiment_config);
      spec.jobs = experiment_jobs;
      const spectra::ExperimentResult result = spectra::run_experiment(spec);
      bool all_ok = true;
      for (const auto& run : result.runs) {
        std::cout << run.name << ": "
                  << (run.ok ? "ok" : ("FAILED: " + run.error)) << "\n";
        all_ok = all_ok && run.ok;
      }
      std::cout << "summary: " << result.summary_path << "\n";
      return all_ok ? 0 : 1;
    }

    if (verify->parsed()) {
      const spectra::Scenario sc = spectra::resolve_scenario(verify_scenario);
      const spectra::Theorem2Record rec =
          spectra::verify_theorem2(sc, verify_epsilon);
      std::cout << (rec.pass ? "PASS" : "FAIL") << ": " << rec.detail << "\n";
      return rec.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
