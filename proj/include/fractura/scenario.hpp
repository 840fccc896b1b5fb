#pragma once

// Scenario file ingestion: one JSON document describes the mesh (generator
// parameters, a file reference, or inline arrays), the bulk coefficient, the
// surface density, the crack graph, the initial crack, the load program and
// the run defaults. Every error names the offending field.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fractura/evolution.hpp"
#include "fractura/families.hpp"
#include "fractura/io.hpp"

namespace fractura {

struct LoadedScenario {
  Scenario scenario;
  std::vector<double> deltas;
  SearchStrategy strategy = SearchStrategy::exhaustive;
  std::optional<std::string> lsc_family;
  int lsc_n_max = 64;
  // Pre-built trace for the verifier (negative controls); bypasses minimization.
  std::optional<std::vector<std::vector<int>>> trace_fixture;
  double fixture_delta = 0.25;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* field,
                                           const std::string& context) {
  if (!j.contains(field))
    throw ValidationError("scenario field \"" + context + "." + field + "\" is missing");
  return j.at(field);
}

inline Mesh parse_mesh(const nlohmann::json& j, const std::string& base_dir, int refine) {
  if (refine < 1) throw ValidationError("mesh refinement override must be >= 1");
  if (j.contains("file") || j.contains("nodes")) {
    if (refine > 1)
      throw ValidationError("mesh refinement override requires a generated mesh (mesh.box)");
    if (j.contains("file")) {
      const std::string path = base_dir + "/" + j.at("file").get<std::string>();
      return mesh_from_json(nlohmann::json::parse(read_text_file(path)));
    }
    return mesh_from_json(j);
  }
  const auto& box = require_field(j, "box", "mesh");
  if (!box.is_array() || box.size() != 4)
    throw ValidationError("scenario field \"mesh.box\" must be [x0, y0, x1, y1]");
  std::vector<std::string> dirichlet;
  for (const auto& side : require_field(j, "dirichlet", "mesh"))
    dirichlet.push_back(side.get<std::string>());
  return rect_mesh(box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                   box[3].get<double>(), refine * require_field(j, "nx", "mesh").get<int>(),
                   refine * require_field(j, "ny", "mesh").get<int>(), dirichlet,
                   j.value("allow_boundary_cracks", false));
}

inline std::vector<Segment> parse_segments(const nlohmann::json& j, const std::string& context) {
  std::vector<Segment> segs;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 4)
      throw ValidationError("scenario field \"" + context + "\" rows must be [x1,y1,x2,y2]");
    segs.push_back({{row[0].get<double>(), row[1].get<double>()},
                    {row[2].get<double>(), row[3].get<double>()}});
  }
  return segs;
}

inline ScalarCoefficientField parse_scalar_coefficient(const nlohmann::json& j,
                                                       const Mesh& mesh) {
  const std::string kind = require_field(j, "kind", "coefficient").get<std::string>();
  const double a1 = require_field(j, "alpha1", "coefficient").get<double>();
  const double a2 = require_field(j, "alpha2", "coefficient").get<double>();
  if (!(a1 > 0.0))
    throw ValidationError("scenario field \"coefficient.alpha1\" violates the ellipticity bound alpha1 > 0");
  if (kind == "isotropic")
    return ScalarCoefficientField::isotropic(require_field(j, "value", "coefficient").get<double>(),
                                             a1, a2);
  if (kind == "constant") {
    const auto& a = require_field(j, "a", "coefficient");
    if (!a.is_array() || a.size() != 3)
      throw ValidationError("scenario field \"coefficient.a\" must be [a11, a12, a22]");
    return ScalarCoefficientField::constant(a[0].get<double>(), a[1].get<double>(),
                                            a[2].get<double>(), a1, a2);
  }
  if (kind == "expression")
    return ScalarCoefficientField::expressions(
        require_field(j, "a11", "coefficient").get<std::string>(),
        require_field(j, "a12", "coefficient").get<std::string>(),
        require_field(j, "a22", "coefficient").get<std::string>(), a1, a2);
  if (kind == "per_triangle")
    return ScalarCoefficientField::per_triangle(
        mesh, require_field(j, "values", "coefficient").get<std::vector<std::array<double, 3>>>(),
        a1, a2);
  throw ValidationError("scenario field \"coefficient.kind\" has unknown value \"" + kind + "\"");
}

inline TensorCoefficientField parse_tensor_coefficient(const nlohmann::json& j,
                                                       const Mesh& mesh) {
  const std::string kind = require_field(j, "kind", "coefficient").get<std::string>();
  const double a1 = require_field(j, "alpha1", "coefficient").get<double>();
  const double a2 = require_field(j, "alpha2", "coefficient").get<double>();
  if (!(a1 > 0.0))
    throw ValidationError("scenario field \"coefficient.alpha1\" violates the ellipticity bound alpha1 > 0");
  if (kind == "identity") return TensorCoefficientField::identity(a1, a2);
  if (kind == "isotropic_lame")
    return TensorCoefficientField::isotropic_lame(
        require_field(j, "mu", "coefficient").get<double>(),
        require_field(j, "lambda", "coefficient").get<double>(), a1, a2);
  if (kind == "constant") {
    const auto& u = require_field(j, "upper", "coefficient");
    if (!u.is_array() || u.size() != 6)
      throw ValidationError("scenario field \"coefficient.upper\" must have 6 entries");
    std::array<double, 6> upper;
    for (int i = 0; i < 6; ++i) upper[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)].get<double>();
    return TensorCoefficientField::constant(upper, a1, a2);
  }
  if (kind == "per_triangle")
    return TensorCoefficientField::per_triangle(
        mesh, require_field(j, "values", "coefficient").get<std::vector<std::array<double, 6>>>(),
        a1, a2);
  throw ValidationError("scenario field \"coefficient.kind\" has unknown value \"" + kind + "\"");
}

inline AnisotropyField parse_phi_kind(const nlohmann::json& j, const Mesh& mesh,
                                      std::uint64_t seed) {
  const std::string kind = require_field(j, "kind", "phi").get<std::string>();
  if (kind == "euclidean") return AnisotropyField::euclidean();
  if (kind == "crystalline") {
    const auto& p = require_field(j, "p", "phi");
    const auto& q = require_field(j, "q", "phi");
    return AnisotropyField::crystalline({p.at(0).get<double>(), p.at(1).get<double>()},
                                        {q.at(0).get<double>(), q.at(1).get<double>()});
  }
  if (kind == "weighted_norm") {
    if (j.contains("m")) {
      const auto& m = j.at("m");
      if (!m.is_array() || m.size() != 3)
        throw ValidationError("scenario field \"phi.m\" must be [m11, m12, m22]");
      return AnisotropyField::weighted_norm_constant(m[0].get<double>(), m[1].get<double>(),
                                                     m[2].get<double>());
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      MatrixGrid grid;
      grid.x0 = require_field(g, "x0", "phi.grid").get<double>();
      grid.y0 = require_field(g, "y0", "phi.grid").get<double>();
      grid.dx = require_field(g, "dx", "phi.grid").get<double>();
      grid.dy = require_field(g, "dy", "phi.grid").get<double>();
      grid.nx = require_field(g, "nx", "phi.grid").get<int>();
      grid.ny = require_field(g, "ny", "phi.grid").get<int>();
      grid.m11 = require_field(g, "m11", "phi.grid").get<std::vector<double>>();
      grid.m12 = require_field(g, "m12", "phi.grid").get<std::vector<double>>();
      grid.m22 = require_field(g, "m22", "phi.grid").get<std::vector<double>>();
      return AnisotropyField::weighted_norm_grid(std::move(grid), seed);
    }
    double xmin, ymin, xmax, ymax;
    mesh.domain().bounds(xmin, ymin, xmax, ymax);
    return AnisotropyField::weighted_norm_expression(
        require_field(j, "m11", "phi").get<std::string>(),
        require_field(j, "m12", "phi").get<std::string>(),
        require_field(j, "m22", "phi").get<std::string>(), {xmin, ymin}, {xmax, ymax}, seed);
  }
  throw ValidationError("scenario field \"phi.kind\" has unknown value \"" + kind + "\"");
}

inline AnisotropyField parse_phi(const nlohmann::json& j, const Mesh& mesh, std::uint64_t seed) {
  AnisotropyField phi = parse_phi_kind(j, mesh, seed);
  if (j.contains("c1") != j.contains("c2"))
    throw ValidationError("scenario fields \"phi.c1\" and \"phi.c2\" must be given together");
  if (j.contains("c1")) phi.declare_bounds(j.at("c1").get<double>(), j.at("c2").get<double>());
  return phi;
}

inline LoadPath parse_load(const nlohmann::json& j, bool planar) {
  std::vector<LoadPath::Knot> knots;
  for (const auto& knot : require_field(j, "knots", "load")) {
    const double t = require_field(knot, "t", "load.knots").get<double>();
    const auto& g = require_field(knot, "g", "load.knots");
    if (planar) {
      if (!g.is_array() || g.size() != 2)
        throw ValidationError("scenario field \"load.knots.g\" must be [gx, gy] for planar runs");
      knots.push_back({t, BoundaryDisplacement::planar(g[0].get<std::string>(), g[1].get<std::string>())});
    } else {
      if (!g.is_string())
        throw ValidationError("scenario field \"load.knots.g\" must be an expression string");
      knots.push_back({t, BoundaryDisplacement::scalar(g.get<std::string>())});
    }
  }
  return LoadPath(std::move(knots));
}

inline bool point_on(const Point2& p, const Segment& s, double tol) {
  return point_segment_dist(p, s) <= tol;
}

// Crack-graph edge ids covered by the given segments (both endpoints on one).
inline std::vector<int> edges_on_segments(const Mesh& mesh, const std::vector<Segment>& segs,
                                          double tol = 1e-9) {
  std::vector<int> ids;
  const auto graph_segs = mesh.crack_edge_segments();
  for (std::size_t e = 0; e < graph_segs.size(); ++e) {
    for (const auto& s : segs) {
      if (point_on(graph_segs[e].a, s, tol) && point_on(graph_segs[e].b, s, tol)) {
        ids.push_back(static_cast<int>(e));
        break;
      }
    }
  }
  return ids;
}

}  // namespace detail

inline LoadedScenario load_scenario(const nlohmann::json& j, std::uint64_t seed = 0,
                                    const std::string& base_dir = ".", int refine = 1) {
  using detail::require_field;
  const std::string name = j.value("name", "scenario");
  const std::string problem = require_field(j, "problem", name).get<std::string>();
  if (problem != "antiplanar" && problem != "planar")
    throw ValidationError("scenario field \"problem\" must be \"antiplanar\" or \"planar\"");
  const bool planar = problem == "planar";

  Mesh mesh = detail::parse_mesh(require_field(j, "mesh", name), base_dir, refine);
  const auto& graph_spec = require_field(j, "crack_graph", name);
  if (graph_spec.contains("segments")) {
    mesh.add_crack_edges_on(detail::parse_segments(graph_spec.at("segments"), "crack_graph.segments"));
  }
  if (mesh.crack_edges().empty())
    throw ValidationError("scenario field \"crack_graph\" selects no mesh edges");

  const AnisotropyField phi = detail::parse_phi(require_field(j, "phi", name), mesh, seed);
  const LoadPath load = detail::parse_load(require_field(j, "load", name), planar);
  const int m = require_field(j, "m", name).get<int>();

  std::vector<int> k0;
  const auto& k0_spec = require_field(j, "k0", name);
  if (k0_spec.contains("edges")) k0 = k0_spec.at("edges").get<std::vector<int>>();
  else if (k0_spec.contains("segments"))
    k0 = detail::edges_on_segments(mesh, detail::parse_segments(k0_spec.at("segments"), "k0.segments"));
  else
    throw ValidationError("scenario field \"k0\" needs \"edges\" or \"segments\"");

  std::optional<ScalarCoefficientField> scalar_coeff;
  std::optional<TensorCoefficientField> tensor_coeff;
  if (planar)
    tensor_coeff = detail::parse_tensor_coefficient(require_field(j, "coefficient", name), mesh);
  else
    scalar_coeff = detail::parse_scalar_coefficient(require_field(j, "coefficient", name), mesh);

  Scenario scenario =
      planar ? Scenario::planar(std::move(mesh), std::move(*tensor_coeff), phi, load, k0, m, name)
             : Scenario::antiplanar(std::move(mesh), std::move(*scalar_coeff), phi, load, k0, m,
                                    name);

  LoadedScenario out{std::move(scenario), {}, SearchStrategy::exhaustive, std::nullopt, 64,
                     std::nullopt, 0.25};
  out.deltas = j.value("deltas", std::vector<double>{0.25, 0.125, 0.0625, 0.03125});
  for (double d : out.deltas)
    if (!(d > 0.0 && d <= 1.0))
      throw ValidationError("scenario field \"deltas\" entries must lie in (0, 1]");
  out.strategy = strategy_from_string(j.value("strategy", std::string("exhaustive")));
  if (j.contains("lsc")) {
    out.lsc_family = require_field(j.at("lsc"), "family", "lsc").get<std::string>();
    out.lsc_n_max = j.at("lsc").value("n_max", 64);
  }
  if (j.contains("trace_fixture")) {
    out.trace_fixture = j.at("trace_fixture").get<std::vector<std::vector<int>>>();
    out.fixture_delta = j.value("fixture_delta", 0.25);
  }
  return out;
}

inline LoadedScenario load_scenario_file(const std::string& path, std::uint64_t seed = 0,
                                         int refine = 1) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  std::string base_dir = ".";
  if (const auto slash = path.find_last_of('/'); slash != std::string::npos)
    base_dir = path.substr(0, slash);
  try {
    return load_scenario(j, seed, base_dir, refine);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario file " + path + ": " + e.what());
  }
}

}  // namespace fractura
