#pragma once

// Time-discretized quasi-static growth: at each knot t_i = i*delta the crack
// is a global minimizer of bulk + surface energy among graph cracks containing
// the previous one. Ships the searcher (exhaustive ground truth and greedy),
// the trace verifier (monotonicity, step minimality, energy inequality with
// measured rho(delta), energy balance) and the delta-convergence study.

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fractura/anisotropy.hpp"
#include "fractura/elastic.hpp"
#include "fractura/geometry.hpp"
#include "fractura/mesh.hpp"

namespace fractura {

enum class SearchStrategy { exhaustive, greedy };

inline SearchStrategy strategy_from_string(const std::string& s) {
  if (s == "exhaustive") return SearchStrategy::exhaustive;
  if (s == "greedy") return SearchStrategy::greedy;
  throw ValidationError("unknown search strategy \"" + s + "\" (use exhaustive or greedy)");
}

inline constexpr int kExhaustiveMaxFreeEdges = 20;

// Piecewise-linear-in-time boundary displacement given at load knots.
class LoadPath {
 public:
  struct Knot {
    double t;
    BoundaryDisplacement g;
  };

  explicit LoadPath(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw ValidationError("load path needs at least two knots");
    if (knots_.front().t != 0.0 || knots_.back().t != 1.0)
      throw ValidationError("load path knots must start at t=0 and end at t=1");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (!(knots_[i].t > knots_[i - 1].t))
        throw ValidationError("load path knot times must be strictly increasing");
    const int comps = knots_.front().g.components();
    for (const auto& k : knots_)
      if (k.g.components() != comps)
        throw ValidationError("load path knots mix scalar and planar data");
  }

  int components() const { return knots_.front().g.components(); }
  const std::vector<Knot>& knots() const { return knots_; }

 private:
  std::vector<Knot> knots_;
};

namespace detail {

inline void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int workers = std::min(n_threads, n);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// One fracture problem: mesh, bulk coefficient (scalar or tensor), surface
// density, the crack graph, the initial crack and the load program.
class Scenario {
 public:
  static Scenario antiplanar(Mesh mesh, ScalarCoefficientField a, AnisotropyField phi,
                             LoadPath load, std::vector<int> k0, int max_components,
                             std::string name = "antiplanar") {
    a.validate(mesh);
    if (load.components() != 1) throw ValidationError("anti-planar scenario needs scalar load data");
    return Scenario(std::move(mesh), std::move(a), std::nullopt, std::move(phi), std::move(load),
                    std::move(k0), max_components, std::move(name));
  }

  static Scenario planar(Mesh mesh, TensorCoefficientField A, AnisotropyField phi, LoadPath load,
                         std::vector<int> k0, int max_components, std::string name = "planar") {
    A.validate(mesh);
    if (load.components() != 2) throw ValidationError("planar scenario needs 2-vector load data");
    return Scenario(std::move(mesh), std::nullopt, std::move(A), std::move(phi), std::move(load),
                    std::move(k0), max_components, std::move(name));
  }

  const std::string& name() const { return name_; }
  const Mesh& mesh() const { return mesh_; }
  bool is_planar() const { return tensor_.has_value(); }
  int field_components() const { return is_planar() ? 2 : 1; }
  const CrackGraph& graph() const { return *graph_; }
  const std::vector<int>& k0() const { return k0_; }
  int max_components() const { return graph_->max_components(); }
  const AnisotropyField& phi() const { return phi_; }
  const LoadPath& load() const { return load_; }
  const ScalarCoefficientField& scalar_coefficient() const { return *scalar_; }
  const TensorCoefficientField& tensor_coefficient() const { return *tensor_; }

  bool load_starts_at_zero() const { return g0_zero_; }

  // Nodal load at time t (piecewise linear between knots).
  std::vector<double> load_nodal(double t) const {
    const auto& knots = load_.knots();
    if (t <= 0.0) return knot_nodals_.front();
    if (t >= 1.0) return knot_nodals_.back();
    std::size_t k = 1;
    while (knots[k].t < t) ++k;
    const double w = (t - knots[k - 1].t) / (knots[k].t - knots[k - 1].t);
    std::vector<double> out(knot_nodals_[k].size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (1.0 - w) * knot_nodals_[k - 1][i] + w * knot_nodals_[k][i];
    return out;
  }

  struct Energies {
    double bulk = 0.0;
    double surface = 0.0;
    double total = 0.0;
    SolveResult solve;
  };

  Energies evaluate(const std::vector<int>& edge_ids, const std::vector<double>& g_nodal) const {
    const CrackSet k = graph_->make(edge_ids);
    const CrackedDiscretization disc = cut_mesh(mesh_, k);
    Energies e;
    e.solve = is_planar() ? solve_planar(disc, *tensor_, g_nodal)
                          : solve_antiplanar(disc, *scalar_, g_nodal);
    e.bulk = e.solve.bulk_energy;
    e.surface = surface_energy(k, phi_);
    e.total = e.bulk + e.surface;
    return e;
  }

  double work_pairing(const std::vector<int>& edge_ids, const Eigen::VectorXd& u_dofs,
                      const std::vector<double>& w_nodal) const {
    const CrackedDiscretization disc = cut_mesh(mesh_, graph_->make(edge_ids));
    const Eigen::VectorXd w = expand_nodal(disc, w_nodal, field_components());
    return is_planar() ? energy_inner_product(disc, *tensor_, u_dofs, w)
                       : energy_inner_product(disc, *scalar_, u_dofs, w);
  }

 private:
  Scenario(Mesh mesh, std::optional<ScalarCoefficientField> a,
           std::optional<TensorCoefficientField> A, AnisotropyField phi, LoadPath load,
           std::vector<int> k0, int max_components, std::string name)
      : mesh_(std::move(mesh)),
        scalar_(std::move(a)),
        tensor_(std::move(A)),
        phi_(std::move(phi)),
        load_(std::move(load)),
        k0_(std::move(k0)),
        name_(std::move(name)) {
    if (mesh_.crack_edges().empty())
      throw ValidationError("scenario mesh has an empty crack graph");
    graph_.emplace(mesh_.crack_edge_segments(), max_components);
    std::sort(k0_.begin(), k0_.end());
    k0_.erase(std::unique(k0_.begin(), k0_.end()), k0_.end());
    const CrackSet initial = graph_->make(k0_);  // validates ids
    if (!k0_.empty() && initial.component_count() > max_components)
      throw ValidationError("initial crack violates the component bound m");
    for (const auto& knot : load_.knots())
      knot_nodals_.push_back(knot.g.nodal_values(mesh_));
    g0_zero_ = true;
    for (double v : knot_nodals_.front())
      if (v != 0.0) g0_zero_ = false;
  }

  Mesh mesh_;
  std::optional<ScalarCoefficientField> scalar_;
  std::optional<TensorCoefficientField> tensor_;
  AnisotropyField phi_;
  LoadPath load_;
  std::vector<int> k0_;
  std::string name_;
  std::optional<CrackGraph> graph_;
  std::vector<std::vector<double>> knot_nodals_;
  bool g0_zero_ = false;
};

namespace detail {

// Deterministic minimizer selection: energy up to a relative tie tolerance,
// then fewest edges, then the lexicographically smallest edge tuple.
inline bool candidate_better(double e_new, const std::vector<int>& ids_new, double e_best,
                             const std::vector<int>& ids_best) {
  const double tol = 1e-12 * (1.0 + std::min(std::abs(e_new), std::abs(e_best)));
  if (e_new < e_best - tol) return true;
  if (e_new > e_best + tol) return false;
  if (ids_new.size() != ids_best.size()) return ids_new.size() < ids_best.size();
  return ids_new < ids_best;
}

inline std::vector<int> merge_ids(const std::vector<int>& base, const std::vector<int>& extra) {
  std::vector<int> out;
  out.reserve(base.size() + extra.size());
  std::merge(base.begin(), base.end(), extra.begin(), extra.end(), std::back_inserter(out));
  return out;
}

// All feasible supersets of `base` in the graph (component count <= m),
// including `base` itself. Enumeration over the free-edge bitmask.
inline std::vector<std::vector<int>> enumerate_supersets(const CrackGraph& graph,
                                                         const std::vector<int>& base) {
  std::vector<int> free_edges;
  for (int e = 0; e < static_cast<int>(graph.edge_count()); ++e)
    if (!std::binary_search(base.begin(), base.end(), e)) free_edges.push_back(e);
  if (static_cast<int>(free_edges.size()) > kExhaustiveMaxFreeEdges)
    throw ValidationError("exhaustive search over " + std::to_string(free_edges.size()) +
                          " free edges exceeds the limit of " +
                          std::to_string(kExhaustiveMaxFreeEdges));
  std::vector<std::vector<int>> out;
  const std::uint64_t n_masks = std::uint64_t{1} << free_edges.size();
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    std::vector<int> extra;
    for (std::size_t b = 0; b < free_edges.size(); ++b)
      if (mask & (std::uint64_t{1} << b)) extra.push_back(free_edges[b]);
    std::vector<int> ids = merge_ids(base, extra);
    if (!ids.empty() && graph.make(ids).component_count() > graph.max_components()) continue;
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace detail

struct StepResult {
  std::vector<int> edge_ids;
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
  SolveResult solve;
  int candidates = 0;  // feasible candidates considered
  int solves = 0;
};

// One step of the incremental minimization: an admissible minimizer of
// bulk + surface at datum g among graph cracks containing k_prev.
inline StepResult incremental_step(const Scenario& scenario, const std::vector<int>& k_prev,
                                   const std::vector<double>& g_nodal, SearchStrategy strategy,
                                   int n_threads = 1) {
  StepResult out;
  if (strategy == SearchStrategy::exhaustive) {
    const auto candidates = detail::enumerate_supersets(scenario.graph(), k_prev);
    std::vector<Scenario::Energies> energies(candidates.size());
    detail::parallel_for(static_cast<int>(candidates.size()), n_threads, [&](int i) {
      energies[static_cast<std::size_t>(i)] =
          scenario.evaluate(candidates[static_cast<std::size_t>(i)], g_nodal);
    });
    int best = -1;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      if (best < 0 || detail::candidate_better(energies[static_cast<std::size_t>(i)].total,
                                               candidates[static_cast<std::size_t>(i)],
                                               energies[static_cast<std::size_t>(best)].total,
                                               candidates[static_cast<std::size_t>(best)])) {
        best = i;
      }
    }
    out.edge_ids = candidates[static_cast<std::size_t>(best)];
    auto& e = energies[static_cast<std::size_t>(best)];
    out.bulk = e.bulk;
    out.surface = e.surface;
    out.total = e.total;
    out.solve = std::move(e.solve);
    out.candidates = static_cast<int>(candidates.size());
    out.solves = static_cast<int>(candidates.size());
    return out;
  }

  // Greedy: best-improvement single-edge additions while the total decreases.
  std::vector<int> current = k_prev;
  Scenario::Energies e_cur = scenario.evaluate(current, g_nodal);
  out.candidates = 1;
  out.solves = 1;
  for (;;) {
    std::vector<std::vector<int>> trials;
    for (int e = 0; e < static_cast<int>(scenario.graph().edge_count()); ++e) {
      if (std::binary_search(current.begin(), current.end(), e)) continue;
      std::vector<int> ids = detail::merge_ids(current, {e});
      if (scenario.graph().make(ids).component_count() > scenario.max_components()) continue;
      trials.push_back(std::move(ids));
    }
    if (trials.empty()) break;
    std::vector<Scenario::Energies> energies(trials.size());
    detail::parallel_for(static_cast<int>(trials.size()), n_threads, [&](int i) {
      energies[static_cast<std::size_t>(i)] = scenario.evaluate(trials[static_cast<std::size_t>(i)], g_nodal);
    });
    out.candidates += static_cast<int>(trials.size());
    out.solves += static_cast<int>(trials.size());
    int best = -1;
    for (int i = 0; i < static_cast<int>(trials.size()); ++i) {
      if (best < 0 || detail::candidate_better(energies[static_cast<std::size_t>(i)].total,
                                               trials[static_cast<std::size_t>(i)],
                                               energies[static_cast<std::size_t>(best)].total,
                                               trials[static_cast<std::size_t>(best)]))
        best = i;
    }
    if (!(energies[static_cast<std::size_t>(best)].total < e_cur.total)) break;
    current = trials[static_cast<std::size_t>(best)];
    e_cur = std::move(energies[static_cast<std::size_t>(best)]);
  }
  out.edge_ids = std::move(current);
  out.bulk = e_cur.bulk;
  out.surface = e_cur.surface;
  out.total = e_cur.total;
  out.solve = std::move(e_cur.solve);
  return out;
}

struct StepRecord {
  int step = 0;
  double t = 0.0;
  std::vector<int> edge_ids;
  double h1 = 0.0;
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
  double work_increment = 0.0;  // 2 (u_i, g_{i+1} - g_i)_a ; zero on the last step
  int candidates = 0;
  int solves = 0;
};

struct EvolutionTrace {
  double delta = 0.0;
  int n_steps = 0;  // N_delta; steps run 0..N_delta
  bool g0_zero = false;
  std::vector<StepRecord> steps;
};

inline int steps_for_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  return static_cast<int>(std::floor(1.0 / delta + 1e-9));
}

inline EvolutionTrace run_evolution(const Scenario& scenario, double delta,
                                    SearchStrategy strategy, int n_threads = 1) {
  EvolutionTrace trace;
  trace.delta = delta;
  trace.n_steps = steps_for_delta(delta);
  trace.g0_zero = scenario.load_starts_at_zero();

  std::vector<int> current = scenario.k0();
  for (int i = 0; i <= trace.n_steps; ++i) {
    const double t = i * delta;
    const std::vector<double> g = scenario.load_nodal(t);
    StepResult step;
    try {
      step = incremental_step(scenario, current, g, strategy, n_threads);
    } catch (const SolverError& err) {
      throw SolverError("step " + std::to_string(i) + ": " + err.what());
    }
    current = step.edge_ids;

    StepRecord rec;
    rec.step = i;
    rec.t = t;
    rec.edge_ids = step.edge_ids;
    rec.h1 = h1_measure(scenario.graph().make(step.edge_ids));
    rec.bulk = step.bulk;
    rec.surface = step.surface;
    rec.total = step.total;
    rec.candidates = step.candidates;
    rec.solves = step.solves;
    if (i < trace.n_steps) {
      const std::vector<double> g_next = scenario.load_nodal((i + 1) * delta);
      std::vector<double> dg(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) dg[k] = g_next[k] - g[k];
      rec.work_increment = 2.0 * scenario.work_pairing(step.edge_ids, step.solve.dofs, dg);
    }
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

// Rebuild a trace from prescribed edge sets (each solved at its knot but not
// minimized); negative-control fixtures enter the verifier this way.
inline EvolutionTrace trace_from_edge_sets(const Scenario& scenario, double delta,
                                           const std::vector<std::vector<int>>& edge_sets) {
  EvolutionTrace trace;
  trace.delta = delta;
  trace.n_steps = steps_for_delta(delta);
  trace.g0_zero = scenario.load_starts_at_zero();
  if (edge_sets.size() != static_cast<std::size_t>(trace.n_steps) + 1)
    throw ValidationError("fixture trace needs N_delta + 1 edge sets");
  for (int i = 0; i <= trace.n_steps; ++i) {
    const double t = i * delta;
    std::vector<int> ids = edge_sets[static_cast<std::size_t>(i)];
    std::sort(ids.begin(), ids.end());
    const std::vector<double> g = scenario.load_nodal(t);
    const Scenario::Energies e = scenario.evaluate(ids, g);
    StepRecord rec;
    rec.step = i;
    rec.t = t;
    rec.edge_ids = ids;
    rec.h1 = h1_measure(scenario.graph().make(ids));
    rec.bulk = e.bulk;
    rec.surface = e.surface;
    rec.total = e.total;
    if (i < trace.n_steps) {
      const std::vector<double> g_next = scenario.load_nodal((i + 1) * delta);
      std::vector<double> dg(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) dg[k] = g_next[k] - g[k];
      rec.work_increment = 2.0 * scenario.work_pairing(ids, e.solve.dofs, dg);
    }
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

struct VerificationReport {
  struct MinimalityEntry {
    int step = 0;
    int candidates = 0;
    double worst_violation = 0.0;  // E_i - min over candidates of E(g_i, K)
  };
  struct ResidualEntry {
    int i = 0, j = 0;
    double residual = 0.0;  // E_j - E_i - W_ij
  };

  bool monotone = true;                  // edge-set containment step to step
  int first_monotonicity_violation = -1;
  bool feasible = true;                  // component count <= m at every step
  bool energy_decomposition_ok = true;   // total = bulk + surface
  bool minimality_checked = false;       // enumeration feasible and requested
  bool minimality_ok = true;             // no enumerated candidate beats K_i
  double minimality_worst = 0.0;         // max over steps of E_i - min_K E(g_i, K)
  std::vector<MinimalityEntry> minimality_entries;
  bool forward_ok = true;                // E(g_i, K_{i+1}) >= E(g_i, K_i)
  double forward_worst = 0.0;            // most negative forward gap
  double rho = 0.0;                      // worst positive part of E_j - E_i - W_ij
  int rho_i = -1, rho_j = -1;
  std::vector<ResidualEntry> residual_pairs;  // every knot pair i < j
  double balance_defect = 0.0;           // |E_N - E_0 - sum of work increments|
  bool pass = true;
  std::vector<std::string> failures;
};

// Trace checks: irreversibility via edge containment, per-step argmin
// re-checks against the enumerated candidate class, the step energy
// inequality with its measured residual, and the telescoped energy balance.
inline VerificationReport verify_trace(const Scenario& scenario, const EvolutionTrace& trace,
                                       int minimality_stride = 1, bool check_minimality = true,
                                       int n_threads = 1) {
  VerificationReport rep;
  const auto& steps = trace.steps;
  if (steps.empty()) throw ValidationError("cannot verify an empty trace");

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const CrackSet k = scenario.graph().make(steps[i].edge_ids);
    if (k.component_count() > scenario.max_components()) rep.feasible = false;
    if (i > 0) {
      const bool contained =
          std::includes(steps[i].edge_ids.begin(), steps[i].edge_ids.end(),
                        steps[i - 1].edge_ids.begin(), steps[i - 1].edge_ids.end());
      if (!contained && rep.monotone) {
        rep.monotone = false;
        rep.first_monotonicity_violation = static_cast<int>(i);
      }
    }
    if (std::abs(steps[i].total - (steps[i].bulk + steps[i].surface)) >
        1e-12 * (1.0 + std::abs(steps[i].total)))
      rep.energy_decomposition_ok = false;
  }

  // Step minimality among supersets of K_i (discrete analogue of conditions
  // (c) and (f); the candidate class is the whole graph above K_i).
  // Step-minimality enumeration is only possible within the exhaustive cap.
  const std::size_t smallest_crack = steps.front().edge_ids.size();
  if (check_minimality &&
      scenario.graph().edge_count() - smallest_crack > kExhaustiveMaxFreeEdges)
    check_minimality = false;
  rep.minimality_checked = check_minimality;
  if (check_minimality) {
    for (std::size_t i = 0; i < steps.size(); i += static_cast<std::size_t>(std::max(1, minimality_stride))) {
      const std::vector<double> g = scenario.load_nodal(steps[i].t);
      const auto candidates = detail::enumerate_supersets(scenario.graph(), steps[i].edge_ids);
      std::vector<double> totals(candidates.size());
      detail::parallel_for(static_cast<int>(candidates.size()), n_threads, [&](int c) {
        totals[static_cast<std::size_t>(c)] =
            scenario.evaluate(candidates[static_cast<std::size_t>(c)], g).total;
      });
      VerificationReport::MinimalityEntry entry;
      entry.step = static_cast<int>(i);
      entry.candidates = static_cast<int>(candidates.size());
      for (double total : totals)
        entry.worst_violation = std::max(entry.worst_violation, steps[i].total - total);
      rep.minimality_worst = std::max(rep.minimality_worst, entry.worst_violation);
      rep.minimality_entries.push_back(entry);
    }
    rep.minimality_ok = rep.minimality_worst <= 1e-9 * (1.0 + std::abs(steps[0].total));
  }

  // Forward minimality: the next crack may not pay off yet at the current load.
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    if (steps[i + 1].edge_ids == steps[i].edge_ids) continue;
    const std::vector<double> g = scenario.load_nodal(steps[i].t);
    const double e_next = scenario.evaluate(steps[i + 1].edge_ids, g).total;
    rep.forward_worst = std::min(rep.forward_worst, e_next - steps[i].total);
  }
  rep.forward_ok = rep.forward_worst >= -1e-9 * (1.0 + std::abs(steps[0].total));

  // Energy inequality residual over all knot pairs i < j.
  std::vector<double> cumulative_work(steps.size(), 0.0);
  for (std::size_t i = 1; i < steps.size(); ++i)
    cumulative_work[i] = cumulative_work[i - 1] + steps[i - 1].work_increment;
  for (std::size_t i = 0; i < steps.size(); ++i)
    for (std::size_t j = i + 1; j < steps.size(); ++j) {
      const double residual =
          steps[j].total - steps[i].total - (cumulative_work[j] - cumulative_work[i]);
      rep.residual_pairs.push_back({static_cast<int>(i), static_cast<int>(j), residual});
      if (residual > rep.rho) {
        rep.rho = residual;
        rep.rho_i = static_cast<int>(i);
        rep.rho_j = static_cast<int>(j);
      }
    }

  rep.balance_defect =
      std::abs(steps.back().total - steps.front().total - cumulative_work.back());

  if (!rep.monotone) rep.failures.push_back("crack monotonicity violated (irreversibility)");
  if (!rep.feasible) rep.failures.push_back("component count exceeds m");
  if (!rep.energy_decomposition_ok) rep.failures.push_back("total != bulk + surface");
  if (!rep.minimality_ok) rep.failures.push_back("a candidate beats the recorded step minimizer");
  if (!rep.forward_ok) rep.failures.push_back("forward minimality violated");
  rep.pass = rep.monotone && rep.feasible && rep.energy_decomposition_ok && rep.minimality_ok &&
             rep.forward_ok;
  return rep;
}

struct StudyRow {
  double t = 0.0;
  double delta = 0.0;
  double d_h_gap = 0.0;
  double bulk_gap = 0.0;
  double surface_gap = 0.0;
};

struct StudyReport {
  std::vector<double> deltas;        // as given, strictly decreasing
  std::vector<double> sample_times;  // knots of the coarsest delta
  std::vector<StudyRow> rows;        // per (delta != finest) x sample time
  bool gaps_nonincreasing = true;
  std::vector<EvolutionTrace> traces;
};

inline const StepRecord& interpolate_trace(const EvolutionTrace& trace, double t) {
  int i = static_cast<int>(std::floor(t / trace.delta + 1e-9));
  i = std::clamp(i, 0, trace.n_steps);
  return trace.steps[static_cast<std::size_t>(i)];
}

// Gaps of the piecewise-constant interpolants against the finest delta at the
// sample times; refining delta should shrink all three.
inline StudyReport delta_convergence_study(const Scenario& scenario, std::vector<double> deltas,
                                           SearchStrategy strategy, int n_threads = 1) {
  if (deltas.size() < 2) throw ValidationError("delta study needs at least two deltas");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1]))
      throw ValidationError("delta list must be strictly decreasing");
  if (!scenario.load_starts_at_zero())
    throw ValidationError("delta-convergence study requires a load with g(0) = 0");

  StudyReport report;
  report.deltas = deltas;
  for (double delta : deltas)
    report.traces.push_back(run_evolution(scenario, delta, strategy, n_threads));

  const int n_coarse = report.traces.front().n_steps;
  for (int k = 0; k <= n_coarse; ++k) report.sample_times.push_back(k * deltas.front());

  const EvolutionTrace& finest = report.traces.back();
  for (double t : report.sample_times) {
    const StepRecord& ref = interpolate_trace(finest, t);
    const CrackSet ref_crack = scenario.graph().make(ref.edge_ids);
    double prev_dh = std::numeric_limits<double>::infinity();
    double prev_bulk = prev_dh, prev_surface = prev_dh;
    for (std::size_t d = 0; d + 1 < report.traces.size(); ++d) {
      const StepRecord& rec = interpolate_trace(report.traces[d], t);
      StudyRow row;
      row.t = t;
      row.delta = deltas[d];
      row.d_h_gap = hausdorff_distance(scenario.graph().make(rec.edge_ids), ref_crack,
                                       scenario.mesh().domain());
      row.bulk_gap = std::abs(rec.bulk - ref.bulk);
      row.surface_gap = std::abs(rec.surface - ref.surface);
      if (row.d_h_gap > prev_dh + 1e-12 || row.bulk_gap > prev_bulk + 1e-12 ||
          row.surface_gap > prev_surface + 1e-12)
        report.gaps_nonincreasing = false;
      prev_dh = row.d_h_gap;
      prev_bulk = row.bulk_gap;
      prev_surface = row.surface_gap;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace fractura
