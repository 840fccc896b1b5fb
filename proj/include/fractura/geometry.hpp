#pragma once

// Polyline compact sets in the plane: H^1 measure, connected components,
// Hausdorff metric with certified sup refinement, approximate unit normals,
// and the finite edge graphs that evolving cracks are drawn from.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "fractura/errors.hpp"

namespace fractura {

inline constexpr double kVertexTol = 1e-12;     // vertex deduplication, absolute per coordinate
inline constexpr double kHausdorffTol = 1e-9;   // certified sup refinement bound

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double dist(const Point2& p, const Point2& q) {
  return std::hypot(p.x - q.x, p.y - q.y);
}

inline bool same_vertex(const Point2& p, const Point2& q, double tol = kVertexTol) {
  return std::abs(p.x - q.x) <= tol && std::abs(p.y - q.y) <= tol;
}

struct Segment {
  Point2 a;
  Point2 b;

  double length() const { return dist(a, b); }
  Point2 at(double t) const { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }
};

// Unit vector orthogonal to a crack segment, canonical sign: first nonzero
// coordinate positive. The surface density is even in the normal, so the sign
// convention is observationally irrelevant; a fixed one keeps tests deterministic.
struct UnitNormal {
  double nx = 0.0;
  double ny = 0.0;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int p) {
    int root = p;
    while (root != parent_[root]) root = parent_[root];
    while (p != root) {
      int next = parent_[p];
      parent_[p] = root;
      p = next;
    }
    return root;
  }

  void merge(int x, int y) {
    int i = find(x), j = find(y);
    if (i == j) return;
    if (size_[i] < size_[j]) std::swap(i, j);
    parent_[j] = i;
    size_[i] += size_[j];
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

inline double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

inline double point_segment_dist(const Point2& p, const Segment& s) {
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

}  // namespace detail

// Polygonal domain \Omega with cached diameter.
class DomainBox {
 public:
  explicit DomainBox(std::vector<Point2> polygon) : poly_(std::move(polygon)) {
    if (poly_.size() < 3) throw ValidationError("domain polygon needs at least 3 vertices");
    for (const auto& p : poly_)
      if (!is_finite(p)) throw ValidationError("domain polygon has non-finite vertex");
    double area2 = 0.0;
    const std::size_t n = poly_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = poly_[i];
      const Point2& q = poly_[(i + 1) % n];
      area2 += p.x * q.y - q.x * p.y;
    }
    if (area2 <= 0.0) throw ValidationError("domain polygon must be counterclockwise");
    check_simple();
    diameter_ = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        diameter_ = std::max(diameter_, dist(poly_[i], poly_[j]));
  }

  static DomainBox box(double x0, double y0, double x1, double y1) {
    return DomainBox({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
  }

  const std::vector<Point2>& polygon() const { return poly_; }
  double diameter() const { return diameter_; }

  void bounds(double& xmin, double& ymin, double& xmax, double& ymax) const {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const auto& p : poly_) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }

 private:
  void check_simple() const {
    const std::size_t n = poly_.size();
    auto proper_intersect = [](const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
      const double d1 = detail::cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y);
      const double d2 = detail::cross(b.x - a.x, b.y - a.y, d.x - a.x, d.y - a.y);
      const double d3 = detail::cross(d.x - c.x, d.y - c.y, a.x - c.x, a.y - c.y);
      const double d4 = detail::cross(d.x - c.x, d.y - c.y, b.x - c.x, b.y - c.y);
      return d1 * d2 < 0.0 && d3 * d4 < 0.0;
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
        if (proper_intersect(poly_[i], poly_[(i + 1) % n], poly_[j], poly_[(j + 1) % n]))
          throw ValidationError("domain polygon is self-intersecting");
      }
    }
  }

  std::vector<Point2> poly_;
  double diameter_ = 0.0;
};

// Compact candidate crack: a finite union of straight segments (plus optional
// isolated points, which carry no length but participate in the metric and the
// component count). Vertices are deduplicated at kVertexTol and per-segment
// component labels come from a union-find over shared vertices.
class CrackSet {
 public:
  CrackSet() = default;

  static CrackSet from_segments(std::vector<Segment> segments) {
    return CrackSet(std::move(segments), {}, 0, {});
  }

  static CrackSet from_points(std::vector<Point2> points) {
    return CrackSet({}, std::move(points), 0, {});
  }

  bool empty() const { return segments_.empty() && points_.empty(); }
  std::size_t segment_count() const { return segments_.size(); }
  const Segment& segment(std::size_t i) const { return segments_[i]; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Point2>& isolated_points() const { return points_; }
  const std::vector<Point2>& vertices() const { return vertices_; }
  int component_label(std::size_t segment_index) const { return segment_component_[segment_index]; }
  int component_count() const { return component_count_; }

  bool graph_backed() const { return graph_id_ != 0; }
  std::uint64_t graph_id() const { return graph_id_; }
  const std::vector<int>& edge_ids() const { return edge_ids_; }

 private:
  friend class CrackGraph;

  CrackSet(std::vector<Segment> segments, std::vector<Point2> points, std::uint64_t graph_id,
           std::vector<int> edge_ids, bool validate_overlaps = true)
      : segments_(std::move(segments)),
        points_(std::move(points)),
        graph_id_(graph_id),
        edge_ids_(std::move(edge_ids)) {
    for (const auto& s : segments_) {
      if (!is_finite(s.a) || !is_finite(s.b)) throw ValidationError("segment with non-finite endpoint");
      if (same_vertex(s.a, s.b)) throw ValidationError("degenerate segment (a == b)");
    }
    for (const auto& p : points_)
      if (!is_finite(p)) throw ValidationError("non-finite isolated point");
    if (validate_overlaps) check_no_overlap();
    build_topology();
  }

  void check_no_overlap() const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      for (std::size_t j = i + 1; j < segments_.size(); ++j) {
        const Segment& s = segments_[i];
        const Segment& t = segments_[j];
        const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
        const double len = std::hypot(dx, dy);
        const double off0 = std::abs(detail::cross(dx, dy, t.a.x - s.a.x, t.a.y - s.a.y)) / len;
        const double off1 = std::abs(detail::cross(dx, dy, t.b.x - s.a.x, t.b.y - s.a.y)) / len;
        if (off0 > kVertexTol || off1 > kVertexTol) continue;  // not collinear
        double u0 = ((t.a.x - s.a.x) * dx + (t.a.y - s.a.y) * dy) / len;
        double u1 = ((t.b.x - s.a.x) * dx + (t.b.y - s.a.y) * dy) / len;
        if (u0 > u1) std::swap(u0, u1);
        const double overlap = std::min(len, u1) - std::max(0.0, u0);
        if (overlap > kVertexTol)
          throw ValidationError("segments overlap along a sub-segment (length would be double-counted)");
      }
    }
  }

  void build_topology() {
    vertices_.clear();
    auto vertex_id = [this](const Point2& p) -> int {
      for (std::size_t k = 0; k < vertices_.size(); ++k)
        if (same_vertex(vertices_[k], p)) return static_cast<int>(k);
      vertices_.push_back(p);
      return static_cast<int>(vertices_.size() - 1);
    };

    std::vector<std::pair<int, int>> seg_vertices;
    seg_vertices.reserve(segments_.size());
    for (const auto& s : segments_) seg_vertices.emplace_back(vertex_id(s.a), vertex_id(s.b));
    for (const auto& p : points_) vertex_id(p);

    detail::UnionFind uf(static_cast<int>(vertices_.size()));
    for (const auto& [va, vb] : seg_vertices) uf.merge(va, vb);

    // Component labels in order of first appearance (segments first, then points).
    std::vector<int> root_label(vertices_.size(), -1);
    int next = 0;
    segment_component_.resize(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const int r = uf.find(seg_vertices[i].first);
      if (root_label[r] < 0) root_label[r] = next++;
      segment_component_[i] = root_label[r];
    }
    for (std::size_t k = 0; k < vertices_.size(); ++k) {
      const int r = uf.find(static_cast<int>(k));
      if (root_label[r] < 0) root_label[r] = next++;
    }
    component_count_ = next;
  }

  std::vector<Segment> segments_;
  std::vector<Point2> points_;
  std::vector<Point2> vertices_;
  std::vector<int> segment_component_;
  int component_count_ = 0;
  std::uint64_t graph_id_ = 0;
  std::vector<int> edge_ids_;  // sorted, when graph-backed
};

// Finite edge set all admissible cracks of one scenario are drawn from.
// Containment between graph-backed cracks is decidable edge-wise.
class CrackGraph {
 public:
  CrackGraph(std::vector<Segment> edges, int max_components)
      : edges_(std::move(edges)), max_components_(max_components), id_(next_id()) {
    if (max_components_ < 1) throw ValidationError("crack graph needs max_components >= 1");
    // Validate once so that subsets can skip the pairwise overlap check.
    CrackSet(edges_, {}, 0, {});
  }

  std::size_t edge_count() const { return edges_.size(); }
  const Segment& edge(int i) const { return edges_.at(static_cast<std::size_t>(i)); }
  const std::vector<Segment>& edges() const { return edges_; }
  int max_components() const { return max_components_; }
  std::uint64_t id() const { return id_; }

  CrackSet make(std::vector<int> edge_ids) const {
    std::sort(edge_ids.begin(), edge_ids.end());
    edge_ids.erase(std::unique(edge_ids.begin(), edge_ids.end()), edge_ids.end());
    std::vector<Segment> segs;
    segs.reserve(edge_ids.size());
    for (int e : edge_ids) {
      if (e < 0 || static_cast<std::size_t>(e) >= edges_.size())
        throw ValidationError("crack graph edge index out of range");
      segs.push_back(edges_[static_cast<std::size_t>(e)]);
    }
    return CrackSet(std::move(segs), {}, id_, std::move(edge_ids), /*validate_overlaps=*/false);
  }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::vector<Segment> edges_;
  int max_components_;
  std::uint64_t id_;
};

// --- Operations -------------------------------------------------------------

// Total length; the one-dimensional Hausdorff measure of a polyline.
inline double h1_measure(const CrackSet& K) {
  double total = 0.0;
  for (const auto& s : K.segments()) total += s.length();
  return total;
}

inline int connected_components(const CrackSet& K) { return K.component_count(); }

// Unit normal at the interior point of a segment. Vertices are an H^1-null
// set; querying t in {0,1} is rejected.
inline UnitNormal approximate_normal(const CrackSet& K, int segment_index, double t) {
  if (segment_index < 0 || static_cast<std::size_t>(segment_index) >= K.segment_count())
    throw ValidationError("segment index out of range");
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("normal undefined at vertex");
  const Segment& s = K.segment(static_cast<std::size_t>(segment_index));
  const double len = s.length();
  double nx = -(s.b.y - s.a.y) / len;
  double ny = (s.b.x - s.a.x) / len;
  if (nx < 0.0 || (nx == 0.0 && ny < 0.0)) {
    nx = -nx;
    ny = -ny;
  }
  return {nx, ny};
}

namespace detail {

// Distances from p to every element of K (segments first, then isolated
// points); returns the minimum. K must be nonempty.
inline double dist_profile(const Point2& p, const CrackSet& K, std::vector<double>* profile) {
  double best = std::numeric_limits<double>::infinity();
  if (profile) profile->clear();
  for (const auto& s : K.segments()) {
    const double d = point_segment_dist(p, s);
    if (profile) profile->push_back(d);
    best = std::min(best, d);
  }
  for (const auto& q : K.isolated_points()) {
    const double d = dist(p, q);
    if (profile) profile->push_back(d);
    best = std::min(best, d);
  }
  return best;
}

// sup_{x in A} dist(x, B) via branch-and-bound along each segment of A.
// Two upper bounds per parameter interval: the Lipschitz-1 bound in arclength,
// and the endpoint max of the (convex) distance to each single element of B.
inline double directed_hausdorff(const CrackSet& A, const CrackSet& B) {
  double lo = 0.0;
  for (const auto& p : A.isolated_points()) lo = std::max(lo, dist_profile(p, B, nullptr));

  struct Interval {
    double t0, t1;     // parameter range on the current segment
    double ub;
    bool operator<(const Interval& o) const { return ub < o.ub; }
  };

  std::vector<double> prof0, prof1;
  for (const auto& seg : A.segments()) {
    const double len = seg.length();
    auto make_interval = [&](double t0, double t1) {
      const double f0 = dist_profile(seg.at(t0), B, &prof0);
      const double f1 = dist_profile(seg.at(t1), B, &prof1);
      lo = std::max(lo, std::max(f0, f1));
      double ub2 = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < prof0.size(); ++k)
        ub2 = std::min(ub2, std::max(prof0[k], prof1[k]));
      const double lip = 0.5 * (f0 + f1 + (t1 - t0) * len);
      return Interval{t0, t1, std::min(lip, ub2)};
    };

    std::priority_queue<Interval> queue;
    queue.push(make_interval(0.0, 1.0));
    int guard = 0;
    while (!queue.empty() && queue.top().ub > lo + kHausdorffTol) {
      if (++guard > 200000) throw SolverError("hausdorff sup refinement did not converge");
      const Interval top = queue.top();
      queue.pop();
      const double tm = 0.5 * (top.t0 + top.t1);
      queue.push(make_interval(top.t0, tm));
      queue.push(make_interval(tm, top.t1));
    }
  }
  return lo;
}

}  // namespace detail

// Hausdorff metric with the empty-set conventions dist(x, empty) = diam(domain)
// and sup over the empty set = 0.
inline double hausdorff_distance(const CrackSet& K1, const CrackSet& K2, const DomainBox& domain) {
  if (K1.empty() && K2.empty()) return 0.0;
  if (K1.empty() || K2.empty()) return domain.diameter();
  return std::max(detail::directed_hausdorff(K1, K2), detail::directed_hausdorff(K2, K1));
}

// Edge-wise containment of graph-backed cracks.
inline bool is_subset(const CrackSet& K1, const CrackSet& K2) {
  if (K1.empty()) return true;
  if (!K1.graph_backed() || !K2.graph_backed())
    throw ValidationError("is_subset requires graph-backed crack sets");
  if (K1.graph_id() != K2.graph_id())
    throw ValidationError("is_subset requires cracks from the same graph");
  return std::includes(K2.edge_ids().begin(), K2.edge_ids().end(), K1.edge_ids().begin(),
                       K1.edge_ids().end());
}

}  // namespace fractura
