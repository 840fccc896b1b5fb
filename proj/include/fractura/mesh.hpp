#pragma once

// Conforming P1 triangulations with tagged boundary edges (Dirichlet part of
// the boundary vs the free remainder) and an interior edge subset usable as
// cracks. Ships a structured rectangle generator and JSON I/O.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "fractura/geometry.hpp"

namespace fractura {

class Mesh {
 public:
  Mesh(std::vector<Point2> nodes, std::vector<std::array<int, 3>> triangles,
       std::vector<std::array<int, 2>> dirichlet_edges,
       std::vector<std::array<int, 2>> neumann_edges,
       std::vector<std::array<int, 2>> crack_edges = {}, bool allow_boundary_cracks = false)
      : nodes_(std::move(nodes)),
        triangles_(std::move(triangles)),
        dirichlet_edges_(std::move(dirichlet_edges)),
        neumann_edges_(std::move(neumann_edges)),
        crack_edges_(std::move(crack_edges)),
        allow_boundary_cracks_(allow_boundary_cracks) {
    finalize();
  }

  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<int, 2>>& dirichlet_edges() const { return dirichlet_edges_; }
  const std::vector<std::array<int, 2>>& neumann_edges() const { return neumann_edges_; }
  const std::vector<std::array<int, 2>>& crack_edges() const { return crack_edges_; }
  const std::vector<std::vector<int>>& node_triangles() const { return node_triangles_; }
  bool node_on_dirichlet(int v) const { return dirichlet_node_[static_cast<std::size_t>(v)] != 0; }
  bool node_on_boundary(int v) const { return boundary_node_[static_cast<std::size_t>(v)] != 0; }
  const DomainBox& domain() const { return *domain_; }
  bool allow_boundary_cracks() const { return allow_boundary_cracks_; }

  double triangle_area(int t) const {
    const auto& tri = triangles_[static_cast<std::size_t>(t)];
    const Point2& p0 = nodes_[static_cast<std::size_t>(tri[0])];
    const Point2& p1 = nodes_[static_cast<std::size_t>(tri[1])];
    const Point2& p2 = nodes_[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
  }

  Point2 centroid(int t) const {
    const auto& tri = triangles_[static_cast<std::size_t>(t)];
    const Point2& p0 = nodes_[static_cast<std::size_t>(tri[0])];
    const Point2& p1 = nodes_[static_cast<std::size_t>(tri[1])];
    const Point2& p2 = nodes_[static_cast<std::size_t>(tri[2])];
    return {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
  }

  int find_node(const Point2& p, double tol = 1e-9) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (std::abs(nodes_[i].x - p.x) <= tol && std::abs(nodes_[i].y - p.y) <= tol)
        return static_cast<int>(i);
    return -1;
  }

  bool has_edge(int a, int b) const { return edge_count_.count(edge_key(a, b)) > 0; }

  bool is_boundary_edge(int a, int b) const {
    auto it = edge_count_.find(edge_key(a, b));
    return it != edge_count_.end() && it->second == 1;
  }

  bool is_crack_edge(int a, int b) const { return crack_edge_set_.count(edge_key(a, b)) > 0; }

  // Append every mesh edge lying on one of the given segments to the crack
  // graph. Boundary edges are skipped unless the mesh allows boundary cracks.
  int add_crack_edges_on(const std::vector<Segment>& paths, double tol = 1e-9) {
    int added = 0;
    for (const auto& [key, count] : edge_count_) {
      const int a = static_cast<int>(key / nodes_.size());
      const int b = static_cast<int>(key % nodes_.size());
      if (count == 1 && !allow_boundary_cracks_) continue;
      if (crack_edge_set_.count(key)) continue;
      for (const auto& path : paths) {
        if (detail::point_segment_dist(nodes_[static_cast<std::size_t>(a)], path) <= tol &&
            detail::point_segment_dist(nodes_[static_cast<std::size_t>(b)], path) <= tol) {
          crack_edges_.push_back({std::min(a, b), std::max(a, b)});
          crack_edge_set_.insert(key);
          ++added;
          break;
        }
      }
    }
    sort_crack_edges();
    return added;
  }

  // Geometry of the crack graph, ordered like crack_edges().
  std::vector<Segment> crack_edge_segments() const {
    std::vector<Segment> segs;
    segs.reserve(crack_edges_.size());
    for (const auto& e : crack_edges_)
      segs.push_back({nodes_[static_cast<std::size_t>(e[0])], nodes_[static_cast<std::size_t>(e[1])]});
    return segs;
  }

  std::uint64_t edge_key(int a, int b) const {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * nodes_.size() + static_cast<std::uint64_t>(b);
  }

 private:
  void finalize() {
    const std::size_t n = nodes_.size();
    if (n < 3) throw ValidationError("mesh needs at least 3 nodes");
    for (const auto& p : nodes_)
      if (!is_finite(p)) throw ValidationError("mesh node with non-finite coordinates");

    node_triangles_.assign(n, {});
    edge_count_.clear();
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      auto& tri = triangles_[t];
      for (int c = 0; c < 3; ++c)
        if (tri[static_cast<std::size_t>(c)] < 0 || static_cast<std::size_t>(tri[static_cast<std::size_t>(c)]) >= n)
          throw ValidationError("triangle " + std::to_string(t) + " references a missing node");
      if (triangle_area(static_cast<int>(t)) == 0.0)
        throw ValidationError("triangle " + std::to_string(t) + " is degenerate");
      if (triangle_area(static_cast<int>(t)) < 0.0) std::swap(tri[1], tri[2]);
      for (int c = 0; c < 3; ++c) {
        node_triangles_[static_cast<std::size_t>(tri[static_cast<std::size_t>(c)])].push_back(static_cast<int>(t));
        const std::uint64_t key = edge_key(tri[static_cast<std::size_t>(c)], tri[static_cast<std::size_t>((c + 1) % 3)]);
        if (++edge_count_[key] > 2)
          throw ValidationError("mesh edge shared by more than two triangles (non-conforming)");
      }
    }

    // Tagged edges must partition the boundary.
    std::unordered_map<std::uint64_t, int> tagged;
    auto tag = [&](const std::vector<std::array<int, 2>>& edges, const char* label) {
      for (const auto& e : edges) {
        const std::uint64_t key = edge_key(e[0], e[1]);
        auto it = edge_count_.find(key);
        if (it == edge_count_.end())
          throw ValidationError(std::string(label) + " edge is not a mesh edge");
        if (it->second != 1)
          throw ValidationError(std::string(label) + " edge is not on the boundary");
        if (++tagged[key] > 1) throw ValidationError("boundary edge tagged twice");
      }
    };
    tag(dirichlet_edges_, "dirichlet");
    tag(neumann_edges_, "neumann");
    for (const auto& [key, count] : edge_count_)
      if (count == 1 && tagged.find(key) == tagged.end())
        throw ValidationError("untagged boundary edge (must be dirichlet or neumann)");

    boundary_node_.assign(n, 0);
    dirichlet_node_.assign(n, 0);
    for (const auto& [key, count] : edge_count_)
      if (count == 1) {
        boundary_node_[key / n] = 1;
        boundary_node_[key % n] = 1;
      }
    for (const auto& e : dirichlet_edges_) {
      dirichlet_node_[static_cast<std::size_t>(e[0])] = 1;
      dirichlet_node_[static_cast<std::size_t>(e[1])] = 1;
    }

    crack_edge_set_.clear();
    for (const auto& e : crack_edges_) {
      const std::uint64_t key = edge_key(e[0], e[1]);
      auto it = edge_count_.find(key);
      if (it == edge_count_.end()) throw ValidationError("crack edge is not a mesh edge");
      if (it->second == 1 && !allow_boundary_cracks_)
        throw ValidationError("crack edge on the boundary (enable allow_boundary_cracks)");
      crack_edge_set_.insert(key);
    }
    sort_crack_edges();

    build_domain();
  }

  void sort_crack_edges() {
    for (auto& e : crack_edges_)
      if (e[0] > e[1]) std::swap(e[0], e[1]);
    std::sort(crack_edges_.begin(), crack_edges_.end());
  }

  // Walk the single boundary loop in triangle orientation to recover the
  // domain polygon (counterclockwise because the triangles are).
  void build_domain() {
    std::unordered_map<int, int> succ;
    for (const auto& tri : triangles_) {
      for (int c = 0; c < 3; ++c) {
        const int a = tri[static_cast<std::size_t>(c)];
        const int b = tri[static_cast<std::size_t>((c + 1) % 3)];
        if (edge_count_.at(edge_key(a, b)) == 1) succ[a] = b;
      }
    }
    if (succ.empty()) throw ValidationError("mesh has no boundary");
    std::vector<Point2> poly;
    const int start = succ.begin()->first;
    int v = start;
    do {
      poly.push_back(nodes_[static_cast<std::size_t>(v)]);
      auto it = succ.find(v);
      if (it == succ.end()) throw ValidationError("boundary walk failed (non-manifold boundary)");
      v = it->second;
      if (poly.size() > succ.size()) throw ValidationError("boundary walk failed");
    } while (v != start);
    if (poly.size() != succ.size())
      throw ValidationError("mesh boundary has several loops (domain must be simply connected)");
    domain_.emplace(std::move(poly));
  }

  std::vector<Point2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> dirichlet_edges_;
  std::vector<std::array<int, 2>> neumann_edges_;
  std::vector<std::array<int, 2>> crack_edges_;
  bool allow_boundary_cracks_ = false;

  std::vector<std::vector<int>> node_triangles_;
  std::unordered_map<std::uint64_t, int> edge_count_;
  std::unordered_set<std::uint64_t> crack_edge_set_;
  std::vector<char> boundary_node_;
  std::vector<char> dirichlet_node_;
  std::optional<DomainBox> domain_;
};

// Structured rectangle: nx-by-ny cells, each split along the (i,j)->(i+1,j+1)
// diagonal. Sides named "left", "right", "bottom", "top" (or "all") carry the
// Dirichlet condition; the rest of the boundary is free.
inline Mesh rect_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                      const std::vector<std::string>& dirichlet_sides,
                      bool allow_boundary_cracks = false) {
  if (nx < 1 || ny < 1) throw ValidationError("rect_mesh needs nx, ny >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw ValidationError("rect_mesh needs a nonempty box");
  auto wants = [&](const char* side) {
    for (const auto& s : dirichlet_sides)
      if (s == side || s == "all") return true;
    return false;
  };

  std::vector<Point2> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  const double hx = (x1 - x0) / nx, hy = (y1 - y0) / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) nodes.push_back({x0 + i * hx, y0 + j * hy});
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }

  std::vector<std::array<int, 2>> dirichlet, neumann;
  auto put = [&](int a, int b, bool is_dirichlet) {
    if (is_dirichlet) dirichlet.push_back({a, b});
    else neumann.push_back({a, b});
  };
  for (int i = 0; i < nx; ++i) {
    put(id(i, 0), id(i + 1, 0), wants("bottom"));
    put(id(i, ny), id(i + 1, ny), wants("top"));
  }
  for (int j = 0; j < ny; ++j) {
    put(id(0, j), id(0, j + 1), wants("left"));
    put(id(nx, j), id(nx, j + 1), wants("right"));
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(dirichlet), std::move(neumann), {},
              allow_boundary_cracks);
}

inline nlohmann::json mesh_to_json(const Mesh& mesh) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& p : mesh.nodes()) j["nodes"].push_back({p.x, p.y});
  j["triangles"] = mesh.triangles();
  j["dirichlet_edges"] = mesh.dirichlet_edges();
  j["neumann_edges"] = mesh.neumann_edges();
  j["crack_edges"] = mesh.crack_edges();
  j["allow_boundary_cracks"] = mesh.allow_boundary_cracks();
  return j;
}

inline Mesh mesh_from_json(const nlohmann::json& j) {
  std::vector<Point2> nodes;
  for (const auto& row : j.at("nodes")) nodes.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
  auto edges = [&](const char* field) {
    std::vector<std::array<int, 2>> out;
    if (j.contains(field)) out = j.at(field).get<std::vector<std::array<int, 2>>>();
    return out;
  };
  return Mesh(std::move(nodes), j.at("triangles").get<std::vector<std::array<int, 3>>>(),
              edges("dirichlet_edges"), edges("neumann_edges"), edges("crack_edges"),
              j.value("allow_boundary_cracks", false));
}

}  // namespace fractura
