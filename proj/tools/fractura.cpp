// Batch front door: scenario ingestion, run orchestration and deterministic
// artifact emission. Exit codes: 0 success, 2 validation failure, 3 solver
// failure, 4 verification-assertion failure under --strict.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fractura/evolution.hpp"
#include "fractura/families.hpp"
#include "fractura/io.hpp"
#include "fractura/scenario.hpp"
#include "fractura/version.hpp"

namespace {

using namespace fractura;
namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  std::string scenario_path;
  std::string out_dir = "out";
  std::vector<double> deltas;  // override; empty = scenario list
  std::string strategy;        // override; empty = scenario choice
  bool strict = false;
  bool reproducible = false;
  bool export_dofs = false;
  int threads = 1;
  int refine = 1;
  std::uint64_t seed = 0;
};

int log_level() {
  const char* env = std::getenv("FRACTURA_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[fractura] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[fractura:debug] " << msg << "\n";
}

std::string delta_tag(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", delta);
  return buf;
}

class Timings {
 public:
  void record(const std::string& phase, double seconds) { entries_.emplace_back(phase, seconds); }
  nlohmann::json json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [phase, seconds] : entries_) j[phase] = seconds;
    return j;
  }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_manifest(const RunConfig& config, const nlohmann::json& scenario_echo,
                    const Timings& timings) {
  nlohmann::json m;
  m["command"] = config.command;
  m["scenario_path"] = config.scenario_path;
  m["scenario"] = scenario_echo;
  m["seed"] = config.seed;
  m["threads"] = config.threads;
  m["strict"] = config.strict;
  m["reproducible"] = config.reproducible;
  if (!config.deltas.empty()) m["deltas_override"] = config.deltas;
  if (!config.strategy.empty()) m["strategy_override"] = config.strategy;
  if (config.refine != 1) m["refine_override"] = config.refine;
  m["version"] = {{"fractura", FRACTURA_VERSION}};
  if (!config.reproducible) m["timings_seconds"] = timings.json();
  write_text_file(config.out_dir + "/manifest.json", m.dump(2) + "\n");
}

std::string trace_csv(const EvolutionTrace& trace) {
  std::ostringstream out;
  out << "step,t,edges,h1,bulk,surface,total,work_increment\n";
  for (const auto& s : trace.steps) {
    out << s.step << "," << format_float(s.t) << "," << s.edge_ids.size() << ","
        << format_float(s.h1) << "," << format_float(s.bulk) << "," << format_float(s.surface)
        << "," << format_float(s.total) << "," << format_float(s.work_increment) << "\n";
  }
  return out.str();
}

nlohmann::json verification_json(const VerificationReport& rep, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["pass"] = rep.pass;
  j["monotone"] = rep.monotone;
  j["first_monotonicity_violation"] = rep.first_monotonicity_violation;
  j["feasible"] = rep.feasible;
  j["energy_decomposition_ok"] = rep.energy_decomposition_ok;
  j["minimality_checked"] = rep.minimality_checked;
  j["minimality_ok"] = rep.minimality_ok;
  j["minimality_worst"] = rep.minimality_worst;
  j["forward_ok"] = rep.forward_ok;
  j["forward_worst"] = rep.forward_worst;
  j["rho"] = rep.rho;
  j["rho_pair"] = {rep.rho_i, rep.rho_j};
  j["balance_defect"] = rep.balance_defect;
  j["failures"] = rep.failures;
  j["minimality_entries"] = nlohmann::json::array();
  for (const auto& entry : rep.minimality_entries)
    j["minimality_entries"].push_back(
        {{"step", entry.step}, {"candidates", entry.candidates}, {"worst", entry.worst_violation}});
  j["residual_pairs"] = nlohmann::json::array();
  for (const auto& pair : rep.residual_pairs)
    j["residual_pairs"].push_back({pair.i, pair.j, pair.residual});
  return j;
}

void write_snapshots(const RunConfig& config, const Scenario& scenario,
                     const EvolutionTrace& trace) {
  const std::string dir = config.out_dir + "/snapshots/delta_" + delta_tag(trace.delta);
  fs::create_directories(dir);
  for (const auto& step : trace.steps) {
    char name[48];
    std::snprintf(name, sizeof(name), "/step_%03d.svg", step.step);
    write_text_file(dir + name, svg_snapshot(scenario.graph().make(step.edge_ids),
                                             scenario.mesh().domain(), !config.reproducible));
  }
}

int run_solve(const RunConfig& config, const LoadedScenario& loaded, Timings& timings) {
  const Scenario& sc = loaded.scenario;
  const Stopwatch watch;
  const std::vector<double> g = sc.load_nodal(1.0);
  const Scenario::Energies e = sc.evaluate(sc.k0(), g);
  timings.record("solve", watch.seconds());

  nlohmann::json j;
  j["seed"] = config.seed;
  j["crack_edges"] = sc.k0();
  j["bulk_energy"] = e.bulk;
  j["surface_energy"] = e.surface;
  j["total_energy"] = e.total;
  j["residual"] = e.solve.residual;
  j["n_floating_components"] = e.solve.n_floating_components;
  j["floating_regularized"] = e.solve.floating_regularized;
  j["n_dofs"] = static_cast<int>(e.solve.dofs.size());
  write_text_file(config.out_dir + "/solve.json", j.dump(2) + "\n");

  if (config.export_dofs) {
    const CrackedDiscretization disc = cut_mesh(sc.mesh(), sc.graph().make(sc.k0()));
    std::ostringstream csv;
    const int comps = sc.field_components();
    csv << (comps == 1 ? "dof,node,x,y,u\n" : "dof,node,x,y,ux,uy\n");
    for (int d = 0; d < disc.n_dofs; ++d) {
      const Point2& p =
          sc.mesh().nodes()[static_cast<std::size_t>(disc.dof_node[static_cast<std::size_t>(d)])];
      csv << d << "," << disc.dof_node[static_cast<std::size_t>(d)] << "," << format_float(p.x)
          << "," << format_float(p.y);
      for (int c = 0; c < comps; ++c) csv << "," << format_float(e.solve.dofs[comps * d + c]);
      csv << "\n";
    }
    write_text_file(config.out_dir + "/dofs.csv", csv.str());
  }
  write_text_file(config.out_dir + "/crack_k0.svg",
                  svg_snapshot(sc.graph().make(sc.k0()), sc.mesh().domain(), !config.reproducible));
  return 0;
}

int run_evolve(const RunConfig& config, const LoadedScenario& loaded,
               const std::vector<double>& deltas, SearchStrategy strategy, Timings& timings) {
  for (double delta : deltas) {
    const Stopwatch watch;
    const EvolutionTrace trace = run_evolution(loaded.scenario, delta, strategy, config.threads);
    timings.record("evolve_delta_" + delta_tag(delta), watch.seconds());
    log_debug("delta " + delta_tag(delta) + ": " + std::to_string(trace.steps.size()) + " steps");
    write_text_file(config.out_dir + "/trace_delta_" + delta_tag(delta) + ".csv", trace_csv(trace));
    write_snapshots(config, loaded.scenario, trace);
  }
  return 0;
}

int run_verify(const RunConfig& config, const LoadedScenario& loaded,
               const std::vector<double>& deltas, SearchStrategy strategy, Timings& timings) {
  bool all_pass = true;
  if (loaded.trace_fixture) {
    const Stopwatch watch;
    const EvolutionTrace trace =
        trace_from_edge_sets(loaded.scenario, loaded.fixture_delta, *loaded.trace_fixture);
    const VerificationReport rep = verify_trace(loaded.scenario, trace, 1, false, config.threads);
    timings.record("verify_fixture", watch.seconds());
    write_text_file(config.out_dir + "/verification_fixture.json",
                    verification_json(rep, config.seed).dump(2) + "\n");
    all_pass = rep.pass;
    log_info(std::string("fixture verification: ") + (rep.pass ? "pass" : "FAIL"));
  } else {
    for (double delta : deltas) {
      const Stopwatch watch;
      const EvolutionTrace trace = run_evolution(loaded.scenario, delta, strategy, config.threads);
      const VerificationReport rep = verify_trace(loaded.scenario, trace, 1, true, config.threads);
      timings.record("verify_delta_" + delta_tag(delta), watch.seconds());
      write_text_file(config.out_dir + "/trace_delta_" + delta_tag(delta) + ".csv",
                      trace_csv(trace));
      write_text_file(config.out_dir + "/verification_delta_" + delta_tag(delta) + ".json",
                      verification_json(rep, config.seed).dump(2) + "\n");
      if (!rep.pass) all_pass = false;
      log_info("delta " + delta_tag(delta) + " verification: " + (rep.pass ? "pass" : "FAIL") +
               " (rho = " + format_float(rep.rho) + ")");
    }
  }
  return (config.strict && !all_pass) ? 4 : 0;
}

int run_lsc(const RunConfig& config, const LoadedScenario& loaded, Timings& timings) {
  if (!loaded.lsc_family)
    throw ValidationError("scenario field \"lsc\" is required for the lsc command");
  const ConvergentFamily family = builtin_family(*loaded.lsc_family);
  const Stopwatch watch;
  const LscReport rep = lsc_experiment(family, loaded.scenario.phi(), loaded.lsc_n_max);
  timings.record("lsc", watch.seconds());

  std::ostringstream csv;
  csv << "n,d_hausdorff,energy\n";
  for (const auto& row : rep.rows)
    csv << row.n << "," << format_float(row.d_hausdorff) << "," << format_float(row.energy)
        << "\n";
  write_text_file(config.out_dir + "/lsc_" + rep.family + ".csv", csv.str());

  nlohmann::json j;
  j["seed"] = config.seed;
  j["family"] = rep.family;
  j["n_max"] = loaded.lsc_n_max;
  j["tail_infimum"] = rep.tail_infimum;
  j["limit_energy"] = rep.limit_energy;
  j["gap"] = rep.gap;
  j["semicontinuity_holds"] = rep.semicontinuity_holds;
  write_text_file(config.out_dir + "/lsc_" + rep.family + ".json", j.dump(2) + "\n");
  log_info("lsc " + rep.family + ": F(K) = " + format_float(rep.limit_energy) +
           ", tail inf = " + format_float(rep.tail_infimum));
  return (config.strict && !rep.semicontinuity_holds) ? 4 : 0;
}

int run_study(const RunConfig& config, const LoadedScenario& loaded,
              const std::vector<double>& deltas, SearchStrategy strategy, Timings& timings) {
  const Stopwatch watch;
  const StudyReport rep =
      delta_convergence_study(loaded.scenario, deltas, strategy, config.threads);
  timings.record("study", watch.seconds());

  std::ostringstream csv;
  csv << "t,delta,d_h_gap,bulk_gap,surface_gap\n";
  for (const auto& row : rep.rows)
    csv << format_float(row.t) << "," << format_float(row.delta) << ","
        << format_float(row.d_h_gap) << "," << format_float(row.bulk_gap) << ","
        << format_float(row.surface_gap) << "\n";
  write_text_file(config.out_dir + "/study.csv", csv.str());

  nlohmann::json j;
  j["seed"] = config.seed;
  j["deltas"] = rep.deltas;
  j["sample_times"] = rep.sample_times;
  j["gaps_nonincreasing"] = rep.gaps_nonincreasing;
  write_text_file(config.out_dir + "/study.json", j.dump(2) + "\n");

  for (std::size_t i = 0; i < rep.traces.size(); ++i)
    write_text_file(config.out_dir + "/trace_delta_" + delta_tag(rep.deltas[i]) + ".csv",
                    trace_csv(rep.traces[i]));
  log_info(std::string("study gaps nonincreasing: ") + (rep.gaps_nonincreasing ? "yes" : "NO"));
  return (config.strict && !rep.gaps_nonincreasing) ? 4 : 0;
}

int dispatch(const RunConfig& config) {
  Timings timings;
  const Stopwatch total_watch;
  const Stopwatch load_watch;
  const LoadedScenario loaded =
      load_scenario_file(config.scenario_path, config.seed, config.refine);
  timings.record("load_scenario", load_watch.seconds());
  log_info("loaded scenario \"" + loaded.scenario.name() + "\" (" + config.scenario_path + ")");

  const std::vector<double>& deltas = config.deltas.empty() ? loaded.deltas : config.deltas;
  const SearchStrategy strategy =
      config.strategy.empty() ? loaded.strategy : strategy_from_string(config.strategy);

  fs::create_directories(config.out_dir);
  int status = 0;
  if (config.command == "solve") status = run_solve(config, loaded, timings);
  else if (config.command == "evolve") status = run_evolve(config, loaded, deltas, strategy, timings);
  else if (config.command == "verify") status = run_verify(config, loaded, deltas, strategy, timings);
  else if (config.command == "lsc") status = run_lsc(config, loaded, timings);
  else if (config.command == "study") status = run_study(config, loaded, deltas, strategy, timings);
  timings.record("total", total_watch.seconds());

  const nlohmann::json echo = nlohmann::json::parse(read_text_file(config.scenario_path));
  write_manifest(config, echo, timings);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractura: quasi-static brittle fracture on crack graphs"};
  app.require_subcommand(1);

  RunConfig config;
  auto add_common = [&](CLI::App* cmd, bool with_deltas) {
    cmd->add_option("--scenario", config.scenario_path, "scenario JSON file")->required();
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--seed", config.seed, "seed for randomized validation sampling");
    cmd->add_option("--threads", config.threads, "parallel candidate solves");
    cmd->add_option("--refine", config.refine,
                    "mesh-refinement override for generated meshes (multiplies nx, ny)");
    cmd->add_flag("--strict", config.strict, "exit 4 when a verification assertion fails");
    cmd->add_flag("--reproducible", config.reproducible,
                  "suppress timestamps and timings for byte-identical outputs");
    if (with_deltas) {
      cmd->add_option("--delta", config.deltas, "time step list (overrides the scenario)")
          ->delimiter(',');
      cmd->add_option("--strategy", config.strategy, "exhaustive or greedy")
          ->check(CLI::IsMember({"exhaustive", "greedy"}));
    }
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the initial crack at the final load");
  add_common(solve, false);
  solve->add_flag("--export-dofs", config.export_dofs, "write the per-node dof CSV");
  CLI::App* evolve = app.add_subcommand("evolve", "run the incremental evolution per delta");
  add_common(evolve, true);
  CLI::App* verify = app.add_subcommand("verify", "run the evolution and its verification suite");
  add_common(verify, true);
  CLI::App* lsc = app.add_subcommand("lsc", "lower-semicontinuity experiment");
  add_common(lsc, false);
  CLI::App* study = app.add_subcommand("study", "delta-convergence study against the finest delta");
  add_common(study, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (CLI::App* cmd : {solve, evolve, verify, lsc, study})
    if (cmd->parsed()) config.command = cmd->get_name();

  try {
    return dispatch(config);
  } catch (const fractura::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const fractura::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
