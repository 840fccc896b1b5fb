// Acceptance suite: one pass/fail line per criterion, each with its runtime
// budget. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fractura/evolution.hpp"
#include "fractura/families.hpp"
#include "fractura/scenario.hpp"

using namespace fractura;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

LoadedScenario shipped_strip() {
  return load_scenario_file(std::string(FRACTURA_SCENARIO_DIR) + "/strip_tearing.json");
}

LoadedScenario shipped_negative_control() {
  return load_scenario_file(std::string(FRACTURA_SCENARIO_DIR) + "/negative_control.json");
}

// --- criterion 1: length recovery ------------------------------------------

Outcome length_recovery() {
  Outcome out;
  Mesh mesh = rect_mesh(0, 0, 1, 1, 12, 12, {"all"});
  // Every interior horizontal and vertical mesh line is crack-admissible.
  std::vector<Segment> lines;
  for (int k = 1; k < 12; ++k) {
    lines.push_back({{0.0, k / 12.0}, {1.0, k / 12.0}});
    lines.push_back({{k / 12.0, 0.0}, {k / 12.0, 1.0}});
  }
  mesh.add_crack_edges_on(lines);
  const CrackGraph graph(mesh.crack_edge_segments(), 12);

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(graph.edge_count()) - 1);
  std::uniform_int_distribution<int> len(1, 20);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> ids;
    for (int i = len(rng); i > 0; --i) ids.push_back(pick(rng));
    const CrackSet k = graph.make(ids);
    const double f = surface_energy(k, AnisotropyField::euclidean());
    const double l = h1_measure(k);
    out.require(std::abs(f - l) <= 1e-12 * std::max(1.0, l),
                "surface energy " + format_float(f) + " vs length " + format_float(l));
  }
  return out;
}

// --- criterion 2: staircase semicontinuity ----------------------------------

Outcome golab_staircase() {
  Outcome out;
  const ConvergentFamily fam = staircase_family();
  const double sqrt2 = std::sqrt(2.0);

  const LscReport eu = lsc_experiment(fam, AnisotropyField::euclidean(), 64);
  for (const auto& row : eu.rows)
    out.require(std::abs(row.energy - 2.0) <= 1e-12,
                "euclidean F(K_n) != 2 at n=" + std::to_string(row.n));
  out.require(std::abs(eu.limit_energy - sqrt2) <= 1e-12, "euclidean F(K) != sqrt(2)");
  out.require(eu.semicontinuity_holds, "euclidean semicontinuity boolean false");
  out.require(std::abs(eu.gap - (2.0 - sqrt2)) <= 1e-9, "euclidean gap != 2 - sqrt(2)");

  const LscReport cr = lsc_experiment(fam, AnisotropyField::crystalline({1, 0}, {0, 1}), 64);
  for (const auto& row : cr.rows)
    out.require(std::abs(row.energy - 2.0) <= 1e-12,
                "crystalline F(K_n) != 2 at n=" + std::to_string(row.n));
  out.require(std::abs(cr.limit_energy - 2.0) <= 1e-12, "crystalline F(K) != 2");
  out.require(cr.semicontinuity_holds && std::abs(cr.gap) <= 1e-9,
              "crystalline equality not attained");
  return out;
}

// --- criterion 3: solver patch tests ----------------------------------------

Outcome patch_tests() {
  Outcome out;
  const Mesh mesh = rect_mesh(0, 0, 1, 1, 8, 8, {"all"});
  const CrackedDiscretization disc = cut_mesh(mesh, CrackSet{});

  const SolveResult scalar = solve_antiplanar(disc, ScalarCoefficientField::isotropic(1, 1, 1),
                                              BoundaryDisplacement::scalar("x"));
  out.require(std::abs(scalar.bulk_energy - 1.0) <= 1e-10,
              "scalar affine energy " + format_float(scalar.bulk_energy));

  const TensorCoefficientField ident = TensorCoefficientField::identity();
  const SolveResult stretch = solve_planar(disc, ident, BoundaryDisplacement::planar("x", "0"));
  out.require(std::abs(stretch.bulk_energy - 1.0) <= 1e-10,
              "planar stretch energy " + format_float(stretch.bulk_energy));

  const SolveResult rot = solve_planar(disc, ident, BoundaryDisplacement::planar("-y", "x"));
  out.require(std::abs(rot.bulk_energy) <= 1e-12,
              "rigid rotation energy " + format_float(rot.bulk_energy));
  return out;
}

// --- criterion 4: manufactured-solution convergence -------------------------

Outcome manufactured_convergence() {
  Outcome out;
  const double pi = 3.14159265358979323846;
  const double exact = pi * std::sinh(2 * pi) / 4.0;  // energy of sin(pi x) sinh(pi y)
  std::vector<double> errors;
  for (int n : {16, 32, 64}) {
    const Mesh mesh = rect_mesh(0, 0, 1, 1, n, n, {"all"});
    const SolveResult r = solve_antiplanar(cut_mesh(mesh, CrackSet{}),
                                           ScalarCoefficientField::isotropic(1, 1, 1),
                                           BoundaryDisplacement::scalar("sin(pi*x)*sinh(pi*y)"));
    errors.push_back(std::abs(r.bulk_energy - exact));
  }
  out.require(errors[0] / errors[1] >= 3.0,
              "first halving ratio " + format_float(errors[0] / errors[1]));
  out.require(errors[1] / errors[2] >= 3.0,
              "second halving ratio " + format_float(errors[1] / errors[2]));
  out.detail = "ratios " + format_float(errors[0] / errors[1]) + ", " +
               format_float(errors[1] / errors[2]);
  return out;
}

// --- criterion 5: stability under crack convergence -------------------------

Outcome crack_stability() {
  Outcome out;
  Mesh mesh = rect_mesh(0, 0, 8, 1, 256, 32, {"bottom", "top"});
  mesh.add_crack_edges_on({{{0.0, 0.5}, {0.5, 0.5}}});
  auto slit = [&](double len) {
    std::vector<Segment> segs;
    const int k = static_cast<int>(std::round(len * 32));
    for (int i = 0; i < k; ++i) segs.push_back({{i / 32.0, 0.5}, {(i + 1) / 32.0, 0.5}});
    return CrackSet::from_segments(segs);
  };
  std::vector<CrackSet> seq;
  for (int n : {2, 4, 8, 16}) seq.push_back(slit(0.5 - 1.0 / n));
  const StabilityReport rep =
      stability_experiment(mesh, ScalarCoefficientField::isotropic(1, 1, 1),
                           BoundaryDisplacement::scalar("2*y-1"), seq, slit(0.5));
  out.require(rep.gaps_nonincreasing, "energy gaps not monotone decreasing");
  out.require(rep.final_gap_ratio <= 0.01, "final gap ratio " + format_float(rep.final_gap_ratio));
  out.detail = "final gap ratio " + format_float(rep.final_gap_ratio);
  return out;
}

// --- criterion 6: incremental argmin oracle equality -------------------------

Outcome argmin_oracle() {
  Outcome out;
  const LoadedScenario loaded = shipped_strip();
  const Scenario& sc = loaded.scenario;
  const std::size_t free_edges_at_start = sc.graph().edge_count() - sc.k0().size();
  out.require(free_edges_at_start <= 12, "scenario has more than 12 free edges");

  const EvolutionTrace trace = run_evolution(sc, 1.0 / 16, SearchStrategy::exhaustive);

  // Independent brute-force enumeration with the documented tie-break.
  std::vector<int> prev = sc.k0();
  for (const auto& step : trace.steps) {
    const std::vector<double> g = sc.load_nodal(step.t);
    std::vector<int> free;
    for (int e = 0; e < static_cast<int>(sc.graph().edge_count()); ++e)
      if (!std::binary_search(prev.begin(), prev.end(), e)) free.push_back(e);
    std::vector<int> best_ids;
    double best_total = 0.0;
    bool have = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
      std::vector<int> ids = prev;
      for (std::size_t b = 0; b < free.size(); ++b)
        if (mask & (std::uint64_t{1} << b)) ids.push_back(free[b]);
      std::sort(ids.begin(), ids.end());
      if (sc.graph().make(ids).component_count() > sc.max_components()) continue;
      const double total = sc.evaluate(ids, g).total;
      bool better = !have;
      if (have) {
        const double tol = 1e-12 * (1.0 + std::min(std::abs(total), std::abs(best_total)));
        if (total < best_total - tol) better = true;
        else if (total <= best_total + tol)
          better = ids.size() != best_ids.size() ? ids.size() < best_ids.size() : ids < best_ids;
      }
      if (better) {
        best_ids = ids;
        best_total = total;
        have = true;
      }
    }
    out.require(step.edge_ids == best_ids, "argmin mismatch at step " + std::to_string(step.step));
    prev = step.edge_ids;
  }

  const EvolutionTrace greedy = run_evolution(sc, 1.0 / 16, SearchStrategy::greedy);
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const double gap = greedy.steps[i].total - trace.steps[i].total;
    out.require(gap >= -1e-12 * (1.0 + std::abs(trace.steps[i].total)),
                "greedy beat exhaustive at step " + std::to_string(i));
    out.require(gap == 0.0, "greedy gap " + format_float(gap) + " at step " + std::to_string(i));
    worst_gap = std::max(worst_gap, std::abs(gap));
  }
  out.detail = "worst greedy gap " + format_float(worst_gap);
  return out;
}

// --- criterion 7: energy-inequality residual decreases ----------------------

Outcome rho_decreasing() {
  Outcome out;
  const LoadedScenario loaded = shipped_strip();
  std::string rhos;
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {0.25, 0.125, 0.0625, 0.03125}) {
    const EvolutionTrace trace = run_evolution(loaded.scenario, delta, SearchStrategy::exhaustive);
    const VerificationReport rep = verify_trace(loaded.scenario, trace);
    out.require(rep.pass, "verifier failed at delta " + format_float(delta));
    out.require(rep.rho < prev, "rho not strictly decreasing at delta " + format_float(delta));
    rhos += format_float(rep.rho) + " ";
    prev = rep.rho;
  }
  out.detail = "rho(delta) = " + rhos;
  return out;
}

// --- criterion 8: energy balance is first order in delta --------------------

Outcome energy_balance() {
  Outcome out;
  const LoadedScenario loaded = shipped_strip();
  const std::vector<double> deltas{0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> defects;
  double c_measured = 0.0;
  for (double delta : deltas) {
    const EvolutionTrace trace = run_evolution(loaded.scenario, delta, SearchStrategy::exhaustive);
    double work = 0.0;
    for (const auto& step : trace.steps) work += step.work_increment;
    const double defect = std::abs(trace.steps.back().total - trace.steps.front().total - work);
    defects.push_back(defect);
    c_measured = std::max(c_measured, defect / delta);
  }
  for (std::size_t i = 0; i + 1 < defects.size(); ++i) {
    const double ratio = defects[i] / defects[i + 1];
    out.require(ratio >= 1.5 && ratio <= 3.0, "halving ratio " + format_float(ratio));
  }
  out.detail = "C = " + format_float(c_measured) + ", ratios " +
               format_float(defects[0] / defects[1]) + ", " +
               format_float(defects[1] / defects[2]) + ", " +
               format_float(defects[2] / defects[3]);
  return out;
}

// --- criterion 9: monotonicity and feasibility ------------------------------

Outcome monotonicity_feasibility() {
  Outcome out;
  const LoadedScenario loaded = shipped_strip();
  const Scenario& sc = loaded.scenario;
  for (SearchStrategy strategy : {SearchStrategy::exhaustive, SearchStrategy::greedy}) {
    const EvolutionTrace trace = run_evolution(sc, 0.25, strategy);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const CrackSet k = sc.graph().make(trace.steps[i].edge_ids);
      out.require(k.component_count() <= sc.max_components(), "component bound violated");
      if (i > 0)
        out.require(is_subset(sc.graph().make(trace.steps[i - 1].edge_ids), k),
                    "containment violated at step " + std::to_string(i));
    }
  }
  const LoadedScenario control = shipped_negative_control();
  const EvolutionTrace bad =
      trace_from_edge_sets(control.scenario, control.fixture_delta, *control.trace_fixture);
  const VerificationReport rep = verify_trace(control.scenario, bad, 1, false);
  out.require(!rep.monotone && !rep.pass, "negative control was not flagged");
  return out;
}

// --- criterion 10: delta-convergence of energies ----------------------------

Outcome delta_convergence() {
  Outcome out;
  const LoadedScenario loaded = shipped_strip();
  out.require(loaded.scenario.load_starts_at_zero(), "shipped scenario must have g(0) = 0");
  const StudyReport rep =
      delta_convergence_study(loaded.scenario, loaded.deltas, SearchStrategy::exhaustive);
  out.require(rep.gaps_nonincreasing, "a gap increased along the delta list");
  double worst = 0.0;
  for (const auto& row : rep.rows)
    worst = std::max({worst, row.d_h_gap, row.bulk_gap, row.surface_gap});
  out.detail = "worst gap " + format_float(worst);
  return out;
}

struct Criterion {
  int id;
  const char* label;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "length recovery: euclidean surface energy equals H1 measure", 1.0, length_recovery},
      {2, "staircase semicontinuity: strict euclidean gap, crystalline equality", 1.0,
       golab_staircase},
      {3, "solver patch tests: affine data, rigid rotation", 5.0, patch_tests},
      {4, "manufactured-solution convergence under mesh halving", 30.0, manufactured_convergence},
      {5, "bulk-energy stability under crack convergence", 60.0, crack_stability},
      {6, "incremental argmin equals brute force; greedy gap zero", 120.0, argmin_oracle},
      {7, "energy-inequality residual rho strictly decreasing in delta", 300.0, rho_decreasing},
      {8, "energy balance defect first order in delta", 300.0, energy_balance},
      {9, "monotonicity and feasibility; negative control flagged", 1.0, monotonicity_feasibility},
      {10, "delta-convergence gaps nonincreasing at all sampled times", 300.0, delta_convergence},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criterion.budget_seconds) {
      outcome.pass = false;
      outcome.detail += (outcome.detail.empty() ? "" : "; ") + std::string("over budget");
    }
    std::printf("[%s] criterion %2d (%.2fs/%.0fs): %s%s%s\n", outcome.pass ? "PASS" : "FAIL",
                criterion.id, elapsed, criterion.budget_seconds, criterion.label,
                outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
