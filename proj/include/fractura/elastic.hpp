#pragma once

// Crack-conforming P1 solvers for the anti-planar (scalar) and planar (vector)
// minimum problems: node sheets are duplicated along the active crack so the
// discrete space approximates functions on the cracked domain, the boundary
// datum is imposed on Dirichlet nodes off the crack, and components that carry
// no Dirichlet node are pinned (zero mean / rigid motions are energy-neutral).

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fractura/expression.hpp"
#include "fractura/geometry.hpp"
#include "fractura/mesh.hpp"

namespace fractura {

inline constexpr double kLinearSolveTol = 1e-12;  // relative residual

// Direct sparse factorization below this free-dof count, preconditioned
// conjugate gradient above. Settable so tests can drive the iterative path.
inline int& direct_solve_dof_limit() {
  static int limit = 200000;
  return limit;
}

// a(x): symmetric 2x2, uniformly elliptic with alpha1 |xi|^2 <= a xi.xi <= alpha2 |xi|^2.
struct ScalarCoefficientField {
  std::function<std::array<double, 3>(const Point2&)> a;  // {a11, a12, a22}
  double alpha1 = 0.0;
  double alpha2 = 0.0;

  static ScalarCoefficientField isotropic(double value, double alpha1, double alpha2) {
    return {[value](const Point2&) { return std::array<double, 3>{value, 0.0, value}; }, alpha1,
            alpha2};
  }

  static ScalarCoefficientField constant(double a11, double a12, double a22, double alpha1,
                                         double alpha2) {
    return {[=](const Point2&) { return std::array<double, 3>{a11, a12, a22}; }, alpha1, alpha2};
  }

  static ScalarCoefficientField expressions(const std::string& a11, const std::string& a12,
                                            const std::string& a22, double alpha1, double alpha2) {
    Expression e11 = Expression::parse(a11), e12 = Expression::parse(a12),
               e22 = Expression::parse(a22);
    return {[e11, e12, e22](const Point2& p) {
              return std::array<double, 3>{e11(p.x, p.y), e12(p.x, p.y), e22(p.x, p.y)};
            },
            alpha1, alpha2};
  }

  // Piecewise constant per triangle, located by point-in-triangle lookup.
  static ScalarCoefficientField per_triangle(const Mesh& mesh,
                                             std::vector<std::array<double, 3>> values,
                                             double alpha1, double alpha2);

  // Eigenvalues within [alpha1, alpha2] at every triangle centroid, hard reject.
  void validate(const Mesh& mesh) const {
    if (!(alpha1 > 0.0) || !(alpha2 >= alpha1))
      throw ValidationError("ellipticity bounds must satisfy 0 < alpha1 <= alpha2");
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
      const auto m = a(mesh.centroid(static_cast<int>(t)));
      const double tr = m[0] + m[2];
      const double disc = std::sqrt(std::max(0.0, 0.25 * (m[0] - m[2]) * (m[0] - m[2]) + m[1] * m[1]));
      const double lmin = 0.5 * tr - disc, lmax = 0.5 * tr + disc;
      if (lmin < alpha1 || lmax > alpha2)
        throw ValidationError("coefficient a(x) violates the ellipticity bounds [alpha1, alpha2] at triangle " +
                              std::to_string(t));
    }
  }
};

// A(x): symmetric automorphism of 2x2 symmetric matrices, stored as the upper
// triangle {A11, A12, A13, A22, A23, A33} in the orthonormal strain basis
// {e11, e22, sqrt(2) e12}.
struct TensorCoefficientField {
  std::function<std::array<double, 6>(const Point2&)> entries;
  double alpha1 = 0.0;
  double alpha2 = 0.0;

  static TensorCoefficientField identity(double alpha1 = 1.0, double alpha2 = 1.0) {
    return {[](const Point2&) { return std::array<double, 6>{1, 0, 0, 1, 0, 1}; }, alpha1, alpha2};
  }

  static TensorCoefficientField constant(std::array<double, 6> upper, double alpha1, double alpha2) {
    return {[upper](const Point2&) { return upper; }, alpha1, alpha2};
  }

  // mu |Eu|^2 + lambda (tr Eu)^2; eigenvalues {mu, mu, mu + 2 lambda}.
  static TensorCoefficientField isotropic_lame(double mu, double lambda, double alpha1,
                                               double alpha2) {
    return {[mu, lambda](const Point2&) {
              return std::array<double, 6>{mu + lambda, lambda, 0, mu + lambda, 0, mu};
            },
            alpha1, alpha2};
  }

  static TensorCoefficientField per_triangle(const Mesh& mesh,
                                             std::vector<std::array<double, 6>> values,
                                             double alpha1, double alpha2);

  Eigen::Matrix3d matrix_at(const Point2& p) const {
    const auto u = entries(p);
    Eigen::Matrix3d m;
    m << u[0], u[1], u[2], u[1], u[3], u[4], u[2], u[4], u[5];
    return m;
  }

  void validate(const Mesh& mesh) const {
    if (!(alpha1 > 0.0) || !(alpha2 >= alpha1))
      throw ValidationError("ellipticity bounds must satisfy 0 < alpha1 <= alpha2");
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(matrix_at(mesh.centroid(static_cast<int>(t))));
      if (eig.eigenvalues().minCoeff() < alpha1 || eig.eigenvalues().maxCoeff() > alpha2)
        throw ValidationError("coefficient A(x) violates the ellipticity bounds [alpha1, alpha2] at triangle " +
                              std::to_string(t));
    }
  }
};

namespace detail {

// Self-contained point-to-triangle locator (closures must not dangle when the
// mesh moves into a scenario).
struct TriangleLocator {
  std::vector<std::array<Point2, 3>> corners;

  explicit TriangleLocator(const Mesh& mesh) {
    corners.reserve(mesh.triangles().size());
    for (const auto& tri : mesh.triangles())
      corners.push_back({mesh.nodes()[static_cast<std::size_t>(tri[0])],
                         mesh.nodes()[static_cast<std::size_t>(tri[1])],
                         mesh.nodes()[static_cast<std::size_t>(tri[2])]});
  }

  int locate(const Point2& p, double tol = 1e-12) const {
    for (std::size_t t = 0; t < corners.size(); ++t) {
      const auto& [p0, p1, p2] = corners[t];
      const double area2 = cross(p1.x - p0.x, p1.y - p0.y, p2.x - p0.x, p2.y - p0.y);
      const double w0 = cross(p2.x - p1.x, p2.y - p1.y, p.x - p1.x, p.y - p1.y) / area2;
      const double w1 = cross(p0.x - p2.x, p0.y - p2.y, p.x - p2.x, p.y - p2.y) / area2;
      const double w2 = cross(p1.x - p0.x, p1.y - p0.y, p.x - p0.x, p.y - p0.y) / area2;
      if (w0 >= -tol && w1 >= -tol && w2 >= -tol) return static_cast<int>(t);
    }
    return -1;
  }
};

}  // namespace detail

inline ScalarCoefficientField ScalarCoefficientField::per_triangle(
    const Mesh& mesh, std::vector<std::array<double, 3>> values, double alpha1, double alpha2) {
  if (values.size() != mesh.triangles().size())
    throw ValidationError("per-triangle coefficient table does not match the triangle count");
  return {[locator = detail::TriangleLocator(mesh), values = std::move(values)](const Point2& p) {
            const int t = locator.locate(p);
            if (t < 0) throw ValidationError("coefficient lookup outside the mesh");
            return values[static_cast<std::size_t>(t)];
          },
          alpha1, alpha2};
}

inline TensorCoefficientField TensorCoefficientField::per_triangle(
    const Mesh& mesh, std::vector<std::array<double, 6>> values, double alpha1, double alpha2) {
  if (values.size() != mesh.triangles().size())
    throw ValidationError("per-triangle coefficient table does not match the triangle count");
  return {[locator = detail::TriangleLocator(mesh), values = std::move(values)](const Point2& p) {
            const int t = locator.locate(p);
            if (t < 0) throw ValidationError("coefficient lookup outside the mesh");
            return values[static_cast<std::size_t>(t)];
          },
          alpha1, alpha2};
}

// Dirichlet datum: closed-form expression(s) in (x, y) or nodal values.
class BoundaryDisplacement {
 public:
  static BoundaryDisplacement scalar(const std::string& g) {
    BoundaryDisplacement b;
    b.exprs_ = {Expression::parse(g)};
    return b;
  }

  static BoundaryDisplacement planar(const std::string& gx, const std::string& gy) {
    BoundaryDisplacement b;
    b.exprs_ = {Expression::parse(gx), Expression::parse(gy)};
    return b;
  }

  static BoundaryDisplacement scalar_nodal(std::vector<double> values) {
    BoundaryDisplacement b;
    b.nodal_ = std::move(values);
    b.components_ = 1;
    return b;
  }

  static BoundaryDisplacement planar_nodal(std::vector<double> values) {
    BoundaryDisplacement b;
    b.nodal_ = std::move(values);
    b.components_ = 2;
    return b;
  }

  int components() const { return nodal_.empty() ? static_cast<int>(exprs_.size()) : components_; }

  // Values at all mesh nodes (interleaved for the planar case); the nodal
  // interpolant is the discrete extension used as test datum everywhere.
  std::vector<double> nodal_values(const Mesh& mesh) const {
    const int comps = components();
    if (!nodal_.empty()) {
      if (nodal_.size() != mesh.nodes().size() * static_cast<std::size_t>(comps))
        throw ValidationError("nodal boundary data does not match the mesh node count");
      for (double v : nodal_)
        if (!std::isfinite(v)) throw ValidationError("non-finite nodal boundary value");
      return nodal_;
    }
    std::vector<double> out(mesh.nodes().size() * static_cast<std::size_t>(comps));
    for (std::size_t v = 0; v < mesh.nodes().size(); ++v)
      for (int c = 0; c < comps; ++c) {
        const double val = exprs_[static_cast<std::size_t>(c)](mesh.nodes()[v].x, mesh.nodes()[v].y);
        if (!std::isfinite(val))
          throw ValidationError("boundary displacement is non-finite at node " + std::to_string(v));
        out[v * static_cast<std::size_t>(comps) + static_cast<std::size_t>(c)] = val;
      }
    return out;
  }

 private:
  std::vector<Expression> exprs_;
  std::vector<double> nodal_;
  int components_ = 1;
};

// Base mesh with node sheets duplicated along the active crack. The crack
// carries one dof per fan sheet at each of its vertices; crack tips keep a
// single node, and boundary nodes hit by the crack split like any other fan.
struct CrackedDiscretization {
  const Mesh* mesh = nullptr;
  std::vector<std::array<int, 3>> tri_dofs;
  std::vector<int> dof_node;  // dof -> base node
  int n_dofs = 0;
  std::vector<char> node_on_crack;
  std::vector<char> dof_dirichlet;
  std::vector<int> dof_component;
  int n_components = 0;
  std::vector<char> component_has_dirichlet;

  int n_floating_components() const {
    int n = 0;
    for (char c : component_has_dirichlet)
      if (!c) ++n;
    return n;
  }
};

inline CrackedDiscretization cut_mesh(const Mesh& mesh, const CrackSet& K) {
  if (!K.isolated_points().empty())
    throw ValidationError("point cracks are not representable on the mesh crack graph");

  const std::size_t n_nodes = mesh.nodes().size();
  CrackedDiscretization disc;
  disc.mesh = &mesh;
  disc.node_on_crack.assign(n_nodes, 0);

  std::unordered_set<std::uint64_t> crack_keys;
  for (const auto& s : K.segments()) {
    const int a = mesh.find_node(s.a);
    const int b = mesh.find_node(s.b);
    if (a < 0 || b < 0 || !mesh.is_crack_edge(a, b))
      throw ValidationError("crack segment is not a crack_graph edge of the mesh");
    crack_keys.insert(mesh.edge_key(a, b));
    disc.node_on_crack[static_cast<std::size_t>(a)] = 1;
    disc.node_on_crack[static_cast<std::size_t>(b)] = 1;
  }

  // One dof per plain node; one dof per fan sheet at crack nodes. Sheets are
  // the groups of incident triangles connected through non-crack edges at the
  // node (interior fans are cycles, boundary fans are chains).
  std::vector<int> plain_dof(n_nodes, -1);
  std::unordered_map<std::uint64_t, int> corner_dof;  // (tri * 3 + corner) -> dof
  int next_dof = 0;
  for (std::size_t v = 0; v < n_nodes; ++v)
    if (!disc.node_on_crack[v]) plain_dof[v] = next_dof++;

  for (std::size_t v = 0; v < n_nodes; ++v) {
    if (!disc.node_on_crack[v]) continue;
    const auto& tris = mesh.node_triangles()[v];
    detail::UnionFind fan(static_cast<int>(tris.size()));
    std::unordered_map<int, std::array<int, 2>> tris_at_edge;  // other node -> up to 2 local ids
    for (std::size_t l = 0; l < tris.size(); ++l) {
      const auto& tri = mesh.triangles()[static_cast<std::size_t>(tris[l])];
      for (int c = 0; c < 3; ++c) {
        const int w = tri[static_cast<std::size_t>(c)];
        if (w == static_cast<int>(v)) continue;
        auto [it, inserted] = tris_at_edge.try_emplace(w, std::array<int, 2>{-1, -1});
        it->second[it->second[0] < 0 ? 0 : 1] = static_cast<int>(l);
      }
    }
    for (const auto& [w, pair] : tris_at_edge) {
      if (pair[1] < 0) continue;  // boundary edge of the fan
      const std::uint64_t key = mesh.edge_key(static_cast<int>(v), w);
      if (crack_keys.count(key) == 0) fan.merge(pair[0], pair[1]);
    }
    std::unordered_map<int, int> sheet_dof;
    for (std::size_t l = 0; l < tris.size(); ++l) {
      const int root = fan.find(static_cast<int>(l));
      auto [it, inserted] = sheet_dof.try_emplace(root, -1);
      if (inserted) it->second = next_dof++;
      const auto& tri = mesh.triangles()[static_cast<std::size_t>(tris[l])];
      for (int c = 0; c < 3; ++c)
        if (tri[static_cast<std::size_t>(c)] == static_cast<int>(v))
          corner_dof[static_cast<std::uint64_t>(tris[l]) * 3 + static_cast<std::uint64_t>(c)] = it->second;
    }
  }

  disc.n_dofs = next_dof;
  disc.dof_node.assign(static_cast<std::size_t>(next_dof), -1);
  disc.tri_dofs.resize(mesh.triangles().size());
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int c = 0; c < 3; ++c) {
      const int v = tri[static_cast<std::size_t>(c)];
      int dof = plain_dof[static_cast<std::size_t>(v)];
      if (dof < 0) dof = corner_dof.at(t * 3 + static_cast<std::uint64_t>(c));
      disc.tri_dofs[t][static_cast<std::size_t>(c)] = dof;
      disc.dof_node[static_cast<std::size_t>(dof)] = v;
    }
  }

  // The boundary condition u = g holds on Dirichlet nodes away from the crack.
  disc.dof_dirichlet.assign(static_cast<std::size_t>(next_dof), 0);
  for (int d = 0; d < next_dof; ++d) {
    const int v = disc.dof_node[static_cast<std::size_t>(d)];
    if (mesh.node_on_dirichlet(v) && !disc.node_on_crack[static_cast<std::size_t>(v)])
      disc.dof_dirichlet[static_cast<std::size_t>(d)] = 1;
  }

  detail::UnionFind comp(next_dof);
  for (const auto& td : disc.tri_dofs) {
    comp.merge(td[0], td[1]);
    comp.merge(td[1], td[2]);
  }
  disc.dof_component.assign(static_cast<std::size_t>(next_dof), -1);
  std::unordered_map<int, int> comp_id;
  for (int d = 0; d < next_dof; ++d) {
    const int root = comp.find(d);
    auto [it, inserted] = comp_id.try_emplace(root, disc.n_components);
    if (inserted) ++disc.n_components;
    disc.dof_component[static_cast<std::size_t>(d)] = it->second;
  }
  disc.component_has_dirichlet.assign(static_cast<std::size_t>(disc.n_components), 0);
  for (int d = 0; d < next_dof; ++d)
    if (disc.dof_dirichlet[static_cast<std::size_t>(d)])
      disc.component_has_dirichlet[static_cast<std::size_t>(disc.dof_component[static_cast<std::size_t>(d)])] = 1;
  return disc;
}

struct SolveResult {
  Eigen::VectorXd dofs;  // scalar: n_dofs values; planar: interleaved pairs
  double bulk_energy = 0.0;
  int n_floating_components = 0;
  bool floating_regularized = false;
  double residual = 0.0;
};

namespace detail {

struct ElementGeometry {
  double area;
  std::array<double, 3> bx, by;  // P1 basis gradients
};

inline ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  const Point2& p0 = mesh.nodes()[static_cast<std::size_t>(tri[0])];
  const Point2& p1 = mesh.nodes()[static_cast<std::size_t>(tri[1])];
  const Point2& p2 = mesh.nodes()[static_cast<std::size_t>(tri[2])];
  ElementGeometry g;
  g.area = mesh.triangle_area(t);
  const double inv = 1.0 / (2.0 * g.area);
  g.bx = {(p1.y - p2.y) * inv, (p2.y - p0.y) * inv, (p0.y - p1.y) * inv};
  g.by = {(p2.x - p1.x) * inv, (p0.x - p2.x) * inv, (p1.x - p0.x) * inv};
  return g;
}

// Pin dofs that remove the kernel of Dirichlet-free components: one dof of a
// scalar component; both dofs of one node plus the best-levered dof of a
// second node for the planar rigid motions.
inline std::vector<int> floating_pins(const CrackedDiscretization& disc, int comps) {
  std::vector<int> pins;
  for (int comp = 0; comp < disc.n_components; ++comp) {
    if (disc.component_has_dirichlet[static_cast<std::size_t>(comp)]) continue;
    int first = -1;
    for (int d = 0; d < disc.n_dofs; ++d)
      if (disc.dof_component[static_cast<std::size_t>(d)] == comp) {
        first = d;
        break;
      }
    if (comps == 1) {
      pins.push_back(first);
      continue;
    }
    pins.push_back(2 * first);
    pins.push_back(2 * first + 1);
    const Point2 pa = disc.mesh->nodes()[static_cast<std::size_t>(disc.dof_node[static_cast<std::size_t>(first)])];
    double best = 0.0;
    int best_pin = -1;
    for (int d = 0; d < disc.n_dofs; ++d) {
      if (d == first || disc.dof_component[static_cast<std::size_t>(d)] != comp) continue;
      const Point2 pb = disc.mesh->nodes()[static_cast<std::size_t>(disc.dof_node[static_cast<std::size_t>(d)])];
      const double lever_x = -(pb.y - pa.y);  // rotation about pa moves pb by (-dy, dx)
      const double lever_y = pb.x - pa.x;
      if (std::abs(lever_x) > best) {
        best = std::abs(lever_x);
        best_pin = 2 * d;
      }
      if (std::abs(lever_y) > best) {
        best = std::abs(lever_y);
        best_pin = 2 * d + 1;
      }
    }
    if (best_pin < 0) throw SolverError("cannot pin the rotation of a floating component");
    pins.push_back(best_pin);
  }
  return pins;
}

// Shared Dirichlet-elimination driver: assemble the element matrices through
// `emit`, fix the constrained dofs, solve the reduced SPD system.
struct LinearSystem {
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs;
  std::vector<int> free_index;  // dof -> free slot or -1
  Eigen::VectorXd values;       // full dof vector (fixed entries preset)
  int n_free = 0;

  void init(int n_total, const std::vector<char>& fixed, const Eigen::VectorXd& fixed_values) {
    free_index.assign(static_cast<std::size_t>(n_total), -1);
    values = fixed_values;
    for (int d = 0; d < n_total; ++d)
      if (!fixed[static_cast<std::size_t>(d)]) free_index[static_cast<std::size_t>(d)] = n_free++;
    rhs = Eigen::VectorXd::Zero(n_free);
  }

  void add(int di, int dj, double k) {
    const int fi = free_index[static_cast<std::size_t>(di)];
    const int fj = free_index[static_cast<std::size_t>(dj)];
    if (fi >= 0 && fj >= 0) triplets.emplace_back(fi, fj, k);
    else if (fi >= 0) rhs[fi] -= k * values[dj];
  }

  // Returns the relative residual of the reduced solve.
  double solve() {
    Eigen::SparseMatrix<double> K(n_free, n_free);
    K.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::VectorXd u_free;
    if (n_free == 0) return 0.0;
    if (n_free <= direct_solve_dof_limit()) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
      if (solver.info() != Eigen::Success)
        throw SolverError("assembled system is not symmetric positive definite (coefficient violation?)");
      u_free = solver.solve(rhs);
      const double scale = std::max(1.0, rhs.norm());
      double res = (K * u_free - rhs).norm() / scale;
      if (res > kLinearSolveTol) {  // one step of iterative refinement
        u_free += solver.solve(rhs - K * u_free);
        res = (K * u_free - rhs).norm() / scale;
      }
      if (res > kLinearSolveTol)
        throw SolverError("linear solve did not reach the 1e-12 relative residual");
      scatter(u_free);
      return res;
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(K);
    cg.setTolerance(kLinearSolveTol);
    cg.setMaxIterations(50000);
    u_free = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw SolverError("conjugate gradient did not reach the 1e-12 relative residual");
    const double res = (K * u_free - rhs).norm() / std::max(1.0, rhs.norm());
    scatter(u_free);
    return res;
  }

  void scatter(const Eigen::VectorXd& u_free) {
    for (std::size_t d = 0; d < free_index.size(); ++d)
      if (free_index[d] >= 0) values[static_cast<Eigen::Index>(d)] = u_free[free_index[d]];
  }
};

}  // namespace detail

// Minimizer of the discrete quadratic int a(x) grad v . grad v over the
// cracked P1 space with v = g on Dirichlet dofs off the crack.
inline SolveResult solve_antiplanar(const CrackedDiscretization& disc,
                                    const ScalarCoefficientField& a,
                                    const std::vector<double>& g_nodal) {
  const Mesh& mesh = *disc.mesh;
  if (g_nodal.size() != mesh.nodes().size())
    throw ValidationError("scalar boundary data does not match the mesh node count");

  Eigen::VectorXd fixed_values = Eigen::VectorXd::Zero(disc.n_dofs);
  std::vector<char> fixed(static_cast<std::size_t>(disc.n_dofs), 0);
  for (int d = 0; d < disc.n_dofs; ++d)
    if (disc.dof_dirichlet[static_cast<std::size_t>(d)]) {
      fixed[static_cast<std::size_t>(d)] = 1;
      fixed_values[d] = g_nodal[static_cast<std::size_t>(disc.dof_node[static_cast<std::size_t>(d)])];
    }
  const std::vector<int> pins = detail::floating_pins(disc, 1);
  for (int d : pins) fixed[static_cast<std::size_t>(d)] = 1;  // pinned to zero

  detail::LinearSystem sys;
  sys.init(disc.n_dofs, fixed, fixed_values);
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    const auto m = a.a(mesh.centroid(static_cast<int>(t)));
    const auto& dofs = disc.tri_dofs[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double k = g.area * (g.bx[static_cast<std::size_t>(i)] * (m[0] * g.bx[static_cast<std::size_t>(j)] + m[1] * g.by[static_cast<std::size_t>(j)]) +
                                   g.by[static_cast<std::size_t>(i)] * (m[1] * g.bx[static_cast<std::size_t>(j)] + m[2] * g.by[static_cast<std::size_t>(j)]));
        sys.add(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], k);
      }
  }

  SolveResult out;
  out.residual = sys.solve();
  out.dofs = std::move(sys.values);
  out.n_floating_components = disc.n_floating_components();
  out.floating_regularized = !pins.empty();

  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    const auto m = a.a(mesh.centroid(static_cast<int>(t)));
    const auto& dofs = disc.tri_dofs[t];
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < 3; ++i) {
      gx += g.bx[static_cast<std::size_t>(i)] * out.dofs[dofs[static_cast<std::size_t>(i)]];
      gy += g.by[static_cast<std::size_t>(i)] * out.dofs[dofs[static_cast<std::size_t>(i)]];
    }
    out.bulk_energy += g.area * (gx * (m[0] * gx + m[1] * gy) + gy * (m[1] * gx + m[2] * gy));
  }
  return out;
}

inline SolveResult solve_antiplanar(const CrackedDiscretization& disc,
                                    const ScalarCoefficientField& a,
                                    const BoundaryDisplacement& g) {
  if (g.components() != 1) throw ValidationError("anti-planar solve needs scalar boundary data");
  return solve_antiplanar(disc, a, g.nodal_values(*disc.mesh));
}

namespace detail {

// Strain-displacement rows for the vector {e11, e22, sqrt(2) e12}.
inline void strain_rows(const ElementGeometry& g, double B[3][6]) {
  constexpr double inv_sqrt2 = 0.7071067811865476;
  for (int i = 0; i < 3; ++i) {
    B[0][2 * i] = g.bx[static_cast<std::size_t>(i)];
    B[0][2 * i + 1] = 0.0;
    B[1][2 * i] = 0.0;
    B[1][2 * i + 1] = g.by[static_cast<std::size_t>(i)];
    B[2][2 * i] = inv_sqrt2 * g.by[static_cast<std::size_t>(i)];
    B[2][2 * i + 1] = inv_sqrt2 * g.bx[static_cast<std::size_t>(i)];
  }
}

}  // namespace detail

// Planar minimizer of int A(x) Eu : Eu over the cracked vector P1 space.
inline SolveResult solve_planar(const CrackedDiscretization& disc, const TensorCoefficientField& A,
                                const std::vector<double>& g_nodal) {
  const Mesh& mesh = *disc.mesh;
  if (g_nodal.size() != 2 * mesh.nodes().size())
    throw ValidationError("planar boundary data does not match the mesh node count");
  const int n_vdofs = 2 * disc.n_dofs;

  Eigen::VectorXd fixed_values = Eigen::VectorXd::Zero(n_vdofs);
  std::vector<char> fixed(static_cast<std::size_t>(n_vdofs), 0);
  for (int d = 0; d < disc.n_dofs; ++d)
    if (disc.dof_dirichlet[static_cast<std::size_t>(d)]) {
      const int v = disc.dof_node[static_cast<std::size_t>(d)];
      for (int c = 0; c < 2; ++c) {
        fixed[static_cast<std::size_t>(2 * d + c)] = 1;
        fixed_values[2 * d + c] = g_nodal[static_cast<std::size_t>(2 * v + c)];
      }
    }
  const std::vector<int> pins = detail::floating_pins(disc, 2);
  for (int d : pins) fixed[static_cast<std::size_t>(d)] = 1;

  detail::LinearSystem sys;
  sys.init(n_vdofs, fixed, fixed_values);
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    const Eigen::Matrix3d Am = A.matrix_at(mesh.centroid(static_cast<int>(t)));
    double B[3][6];
    detail::strain_rows(g, B);
    const auto& dofs = disc.tri_dofs[t];
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double k = 0.0;
        for (int r = 0; r < 3; ++r)
          for (int s = 0; s < 3; ++s) k += B[r][i] * Am(r, s) * B[s][j];
        k *= g.area;
        const int di = 2 * dofs[static_cast<std::size_t>(i / 2)] + (i % 2);
        const int dj = 2 * dofs[static_cast<std::size_t>(j / 2)] + (j % 2);
        sys.add(di, dj, k);
      }
  }

  SolveResult out;
  out.residual = sys.solve();
  out.dofs = std::move(sys.values);
  out.n_floating_components = disc.n_floating_components();
  out.floating_regularized = !pins.empty();

  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    const Eigen::Matrix3d Am = A.matrix_at(mesh.centroid(static_cast<int>(t)));
    double B[3][6];
    detail::strain_rows(g, B);
    const auto& dofs = disc.tri_dofs[t];
    Eigen::Vector3d eps = Eigen::Vector3d::Zero();
    for (int i = 0; i < 6; ++i) {
      const double u = out.dofs[2 * dofs[static_cast<std::size_t>(i / 2)] + (i % 2)];
      for (int r = 0; r < 3; ++r) eps[r] += B[r][i] * u;
    }
    out.bulk_energy += g.area * eps.dot(Am * eps);
  }
  return out;
}

inline SolveResult solve_planar(const CrackedDiscretization& disc, const TensorCoefficientField& A,
                                const BoundaryDisplacement& g) {
  if (g.components() != 2) throw ValidationError("planar solve needs 2-vector boundary data");
  return solve_planar(disc, A, g.nodal_values(*disc.mesh));
}

// Nodal field expanded to the cracked dof layout (same value on every sheet;
// the datum lives on the uncracked domain).
inline Eigen::VectorXd expand_nodal(const CrackedDiscretization& disc,
                                    const std::vector<double>& nodal, int comps) {
  if (nodal.size() != disc.mesh->nodes().size() * static_cast<std::size_t>(comps))
    throw ValidationError("nodal field does not match the mesh node count");
  Eigen::VectorXd out(comps * disc.n_dofs);
  for (int d = 0; d < disc.n_dofs; ++d)
    for (int c = 0; c < comps; ++c)
      out[comps * d + c] = nodal[static_cast<std::size_t>(comps * disc.dof_node[static_cast<std::size_t>(d)] + c)];
  return out;
}

// (v, w)_a over the cracked domain; (u, u)_a is the bulk energy.
inline double energy_inner_product(const CrackedDiscretization& disc,
                                   const ScalarCoefficientField& a, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w) {
  if (u.size() != disc.n_dofs || w.size() != disc.n_dofs)
    throw ValidationError("dof-length mismatch in energy inner product");
  const Mesh& mesh = *disc.mesh;
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    const auto m = a.a(mesh.centroid(static_cast<int>(t)));
    const auto& dofs = disc.tri_dofs[t];
    double ux = 0.0, uy = 0.0, wx = 0.0, wy = 0.0;
    for (int i = 0; i < 3; ++i) {
      ux += g.bx[static_cast<std::size_t>(i)] * u[dofs[static_cast<std::size_t>(i)]];
      uy += g.by[static_cast<std::size_t>(i)] * u[dofs[static_cast<std::size_t>(i)]];
      wx += g.bx[static_cast<std::size_t>(i)] * w[dofs[static_cast<std::size_t>(i)]];
      wy += g.by[static_cast<std::size_t>(i)] * w[dofs[static_cast<std::size_t>(i)]];
    }
    total += g.area * (ux * (m[0] * wx + m[1] * wy) + uy * (m[1] * wx + m[2] * wy));
  }
  return total;
}

inline double energy_inner_product(const CrackedDiscretization& disc,
                                   const TensorCoefficientField& A, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& w) {
  if (u.size() != 2 * disc.n_dofs || w.size() != 2 * disc.n_dofs)
    throw ValidationError("dof-length mismatch in energy inner product");
  const Mesh& mesh = *disc.mesh;
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto g = detail::element_geometry(mesh, static_cast<int>(t));
    const Eigen::Matrix3d Am = A.matrix_at(mesh.centroid(static_cast<int>(t)));
    double B[3][6];
    detail::strain_rows(g, B);
    const auto& dofs = disc.tri_dofs[t];
    Eigen::Vector3d eu = Eigen::Vector3d::Zero(), ew = Eigen::Vector3d::Zero();
    for (int i = 0; i < 6; ++i) {
      const int vd = 2 * dofs[static_cast<std::size_t>(i / 2)] + (i % 2);
      for (int r = 0; r < 3; ++r) {
        eu[r] += B[r][i] * u[vd];
        ew[r] += B[r][i] * w[vd];
      }
    }
    total += g.area * eu.dot(Am * ew);
  }
  return total;
}

// Bulk energies along a Hausdorff-convergent crack sequence against the limit
// crack, solved on a common mesh and datum.
struct StabilityReport {
  std::vector<double> energies;
  double limit_energy = 0.0;
  std::vector<double> gaps;  // |energy_n - limit_energy|
  bool gaps_nonincreasing = true;
  double final_gap_ratio = 0.0;  // last gap / limit energy
};

inline StabilityReport stability_experiment(const Mesh& mesh, const ScalarCoefficientField& a,
                                            const BoundaryDisplacement& g,
                                            const std::vector<CrackSet>& crack_sequence,
                                            const CrackSet& limit_crack) {
  const std::vector<double> g_nodal = g.nodal_values(mesh);
  StabilityReport report;
  report.limit_energy = solve_antiplanar(cut_mesh(mesh, limit_crack), a, g_nodal).bulk_energy;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& k : crack_sequence) {
    const double e = solve_antiplanar(cut_mesh(mesh, k), a, g_nodal).bulk_energy;
    report.energies.push_back(e);
    const double gap = std::abs(e - report.limit_energy);
    report.gaps.push_back(gap);
    if (gap > prev + 1e-12) report.gaps_nonincreasing = false;
    prev = gap;
  }
  if (!report.gaps.empty() && report.limit_energy > 0.0)
    report.final_gap_ratio = report.gaps.back() / report.limit_energy;
  return report;
}

}  // namespace fractura
