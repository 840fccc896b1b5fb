#pragma once

// Surface energy density phi(x, nu): positively 1-homogeneous, even and convex
// in nu, pinched between c1|nu| and c2|nu|. Built-in kinds: euclidean |nu|,
// crystalline |p.nu| + |q.nu|, and the Riemannian sqrt(nu . M(x) nu) with M(x)
// constant, a closed-form expression, or bilinear on a grid.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fractura/errors.hpp"
#include "fractura/expression.hpp"
#include "fractura/geometry.hpp"

namespace fractura {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Symmetric 2x2 coefficient sampled from a regular node grid with bilinear
// interpolation; evaluation points are clamped to the grid hull.
struct MatrixGrid {
  double x0 = 0.0, y0 = 0.0;
  double dx = 1.0, dy = 1.0;
  int nx = 1, ny = 1;  // cells; (nx+1)*(ny+1) nodes, row-major by y
  std::vector<double> m11, m12, m22;

  std::array<double, 3> at(const Point2& p) const {
    double sx = std::clamp((p.x - x0) / dx, 0.0, static_cast<double>(nx));
    double sy = std::clamp((p.y - y0) / dy, 0.0, static_cast<double>(ny));
    int i = std::min(static_cast<int>(sx), nx - 1);
    int j = std::min(static_cast<int>(sy), ny - 1);
    const double u = sx - i, v = sy - j;
    auto lerp = [&](const std::vector<double>& m) {
      const int w = nx + 1;
      const double a = m[j * w + i], b = m[j * w + i + 1];
      const double c = m[(j + 1) * w + i], d = m[(j + 1) * w + i + 1];
      return (1 - v) * ((1 - u) * a + u * b) + v * ((1 - u) * c + u * d);
    };
    return {lerp(m11), lerp(m12), lerp(m22)};
  }

  void check_shape() const {
    const std::size_t n = static_cast<std::size_t>((nx + 1) * (ny + 1));
    if (nx < 1 || ny < 1 || dx <= 0 || dy <= 0)
      throw ValidationError("matrix grid needs positive cell counts and spacings");
    if (m11.size() != n || m12.size() != n || m22.size() != n)
      throw ValidationError("matrix grid entry arrays must have (nx+1)*(ny+1) values");
  }
};

class AnisotropyField {
 public:
  enum class Kind { euclidean, crystalline, weighted_norm };

  static AnisotropyField euclidean() {
    AnisotropyField f;
    f.kind_ = Kind::euclidean;
    f.c1_ = f.c2_ = 1.0;
    return f;
  }

  static AnisotropyField crystalline(Vec2 p, Vec2 q) {
    AnisotropyField f;
    f.kind_ = Kind::crystalline;
    f.p_ = p;
    f.q_ = q;
    if (std::abs(p.x * q.y - p.y * q.x) <= 0.0)
      throw ValidationError("crystalline directions p, q must be linearly independent (c1 > 0)");
    f.crystalline_bounds();
    f.validate({0.0, 0.0}, {1.0, 1.0});
    return f;
  }

  static AnisotropyField weighted_norm_constant(double m11, double m12, double m22) {
    AnisotropyField f;
    f.kind_ = Kind::weighted_norm;
    f.const_m_ = {m11, m12, m22};
    f.matrix_ = [m = f.const_m_](const Point2&) { return m; };
    f.bounds_from_samples({{0.0, 0.0}});
    f.validate({0.0, 0.0}, {1.0, 1.0});
    return f;
  }

  // Expression-valued M(x); hypotheses are validated by sampling the given box.
  static AnisotropyField weighted_norm_expression(const std::string& m11, const std::string& m12,
                                                  const std::string& m22, Point2 lo, Point2 hi,
                                                  std::uint64_t seed = 0) {
    AnisotropyField f;
    f.kind_ = Kind::weighted_norm;
    Expression e11 = Expression::parse(m11);
    Expression e12 = Expression::parse(m12);
    Expression e22 = Expression::parse(m22);
    f.matrix_ = [e11, e12, e22](const Point2& p) {
      return std::array<double, 3>{e11(p.x, p.y), e12(p.x, p.y), e22(p.x, p.y)};
    };
    std::vector<Point2> samples;
    const int n = 32;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        samples.push_back({lo.x + (hi.x - lo.x) * i / n, lo.y + (hi.y - lo.y) * j / n});
    f.bounds_from_samples(samples);
    f.validate(lo, hi, seed);
    return f;
  }

  static AnisotropyField weighted_norm_grid(MatrixGrid grid, std::uint64_t seed = 0) {
    grid.check_shape();
    AnisotropyField f;
    f.kind_ = Kind::weighted_norm;
    // Bilinear interpolation is a convex combination of the node matrices, so
    // node eigenvalue extrema bound the whole field.
    std::vector<Point2> nodes;
    for (int j = 0; j <= grid.ny; ++j)
      for (int i = 0; i <= grid.nx; ++i)
        nodes.push_back({grid.x0 + i * grid.dx, grid.y0 + j * grid.dy});
    const Point2 lo{grid.x0, grid.y0};
    const Point2 hi{grid.x0 + grid.nx * grid.dx, grid.y0 + grid.ny * grid.dy};
    f.matrix_ = [g = std::move(grid)](const Point2& p) { return g.at(p); };
    f.bounds_from_samples(nodes);
    f.validate(lo, hi, seed);
    return f;
  }

  Kind kind() const { return kind_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }

  // Replace the computed pinching constants with declared ones; they must
  // still bound the field (checked against the computed sample extrema).
  AnisotropyField& declare_bounds(double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 >= c1))
      throw ValidationError("declared bounds must satisfy 0 < c1 <= c2");
    const double slack = 1e-12 * (1.0 + c2_);
    if (c1 > c1_ + slack || c2 < c2_ - slack)
      throw ValidationError("declared bounds c1, c2 do not pinch phi (need c1 <= " +
                            std::to_string(c1_) + " and c2 >= " + std::to_string(c2_) + ")");
    c1_ = c1;
    c2_ = c2;
    return *this;
  }

  // phi(x, nu) for arbitrary nonzero nu: evaluates on the normalized direction
  // and scales back, so positive 1-homogeneity holds by construction.
  double operator()(const Point2& x, double nux, double nuy) const {
    const double norm = std::hypot(nux, nuy);
    if (norm == 0.0) throw ValidationError("phi is undefined for the zero vector");
    return unit_eval(x, nux / norm, nuy / norm) * norm;
  }

  // phi on an already-unit direction (exact for the canonical segment normals).
  double unit_eval(const Point2& x, double ux, double uy) const {
    switch (kind_) {
      case Kind::euclidean:
        return 1.0;
      case Kind::crystalline:
        return std::abs(p_.x * ux + p_.y * uy) + std::abs(q_.x * ux + q_.y * uy);
      case Kind::weighted_norm: {
        const auto m = matrix_(x);
        return std::sqrt(ux * (m[0] * ux + m[1] * uy) + uy * (m[1] * ux + m[2] * uy));
      }
    }
    return 0.0;
  }

 private:
  AnisotropyField() = default;

  void crystalline_bounds() {
    // f(theta) = |p.u| + |q.u| is piecewise sinusoidal; minima sit at the kink
    // angles (u perpendicular to p or q) and maxima at the kinks or at the
    // phase angles of s1*p + s2*q.
    std::vector<double> candidates;
    candidates.push_back(std::atan2(p_.y, p_.x) + 1.5707963267948966);
    candidates.push_back(std::atan2(q_.y, q_.x) + 1.5707963267948966);
    double kink_min = std::numeric_limits<double>::infinity();
    double all_max = 0.0;
    auto value = [&](double theta) {
      const double ux = std::cos(theta), uy = std::sin(theta);
      return std::abs(p_.x * ux + p_.y * uy) + std::abs(q_.x * ux + q_.y * uy);
    };
    for (double theta : candidates) kink_min = std::min(kink_min, value(theta));
    for (double theta : candidates) all_max = std::max(all_max, value(theta));
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) {
        const double vx = s1 * p_.x + s2 * q_.x, vy = s1 * p_.y + s2 * q_.y;
        all_max = std::max(all_max, value(std::atan2(vy, vx)));
      }
    c1_ = kink_min;
    c2_ = all_max;
  }

  void bounds_from_samples(const std::vector<Point2>& samples) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& x : samples) {
      const auto m = matrix_(x);
      const double tr = m[0] + m[2];
      const double disc = std::sqrt(std::max(0.0, 0.25 * (m[0] - m[2]) * (m[0] - m[2]) + m[1] * m[1]));
      const double lmin = 0.5 * tr - disc, lmax = 0.5 * tr + disc;
      if (lmin <= 0.0)
        throw ValidationError("weighted_norm matrix is not positive definite at a sample point");
      lo = std::min(lo, lmin);
      hi = std::max(hi, lmax);
    }
    c1_ = std::sqrt(lo);
    c2_ = std::sqrt(hi);
  }

  // Sampled structural hypotheses: 1-homogeneity, evenness, midpoint convexity
  // (10^3 triples, 1e-10), and the pinching c1|nu| <= phi <= c2|nu|.
  void validate(Point2 lo, Point2 hi, std::uint64_t seed = 0) const {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    std::uniform_real_distribution<double> uv(-1.0, 1.0), ut(0.1, 10.0);
    for (int k = 0; k < 1000; ++k) {
      const Point2 x{ux(rng), uy(rng)};
      const double ax = uv(rng), ay = uv(rng), bx = uv(rng), by = uv(rng);
      if (std::hypot(ax, ay) < 1e-8 || std::hypot(bx, by) < 1e-8) continue;
      const double fa = (*this)(x, ax, ay);
      const double fb = (*this)(x, bx, by);

      const double t = ut(rng);
      if (std::abs((*this)(x, t * ax, t * ay) - t * fa) > 1e-12 * (1.0 + t * fa))
        throw ValidationError("phi violates positive 1-homogeneity");
      if (std::abs((*this)(x, -ax, -ay) - fa) > 1e-12 * (1.0 + fa))
        throw ValidationError("phi violates evenness");

      const double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
      if (std::hypot(mx, my) > 1e-8) {
        if ((*this)(x, mx, my) > 0.5 * (fa + fb) + 1e-10)
          throw ValidationError("phi violates midpoint convexity in nu");
      }

      const double na = std::hypot(ax, ay);
      if (fa < c1_ * na - 1e-12 * (1.0 + na) || fa > c2_ * na + 1e-12 * (1.0 + na))
        throw ValidationError("phi violates the pinching c1|nu| <= phi(x,nu) <= c2|nu|");
    }
    if (!(c1_ > 0.0) || !(c2_ >= c1_))
      throw ValidationError("phi bounds must satisfy 0 < c1 <= c2");
  }

  Kind kind_ = Kind::euclidean;
  Vec2 p_{1.0, 0.0}, q_{0.0, 1.0};
  std::array<double, 3> const_m_{1.0, 0.0, 1.0};
  std::function<std::array<double, 3>(const Point2&)> matrix_;
  double c1_ = 1.0, c2_ = 1.0;
};

inline double evaluate_phi(const AnisotropyField& phi, const Point2& x, double nux, double nuy) {
  return phi(x, nux, nuy);
}

namespace detail {

inline UnitNormal segment_normal(const Segment& s) {
  const double len = s.length();
  double nx = -(s.b.y - s.a.y) / len;
  double ny = (s.b.x - s.a.x) / len;
  if (nx < 0.0 || (nx == 0.0 && ny < 0.0)) {
    nx = -nx;
    ny = -ny;
  }
  return {nx, ny};
}

// length x Gauss-2 quadrature of phi along one segment. The normal is constant
// per segment, so the nu-dependence is exact; the quadrature is exact for phi
// affine in x along the segment.
inline double segment_surface_energy(const Segment& s, const AnisotropyField& phi) {
  constexpr double offset = 0.28867513459481288;  // 1/(2*sqrt(3))
  const UnitNormal n = segment_normal(s);
  const Point2 p1 = s.at(0.5 - offset);
  const Point2 p2 = s.at(0.5 + offset);
  return s.length() * (0.5 * (phi.unit_eval(p1, n.nx, n.ny) + phi.unit_eval(p2, n.nx, n.ny)));
}

}  // namespace detail

// F(K) = integral over K of phi(x, nu_x) dH^1.
inline double surface_energy(const CrackSet& K, const AnisotropyField& phi) {
  double total = 0.0;
  for (const auto& s : K.segments()) total += detail::segment_surface_energy(s, phi);
  return total;
}

// Surface energy of the edge-identity difference K \ H on a shared graph.
inline double surface_energy_outside(const CrackSet& K, const CrackSet& H,
                                     const AnisotropyField& phi) {
  if (K.empty()) return 0.0;
  if (H.empty()) return surface_energy(K, phi);
  if (!K.graph_backed() || !H.graph_backed() || K.graph_id() != H.graph_id())
    throw ValidationError("surface_energy_outside requires cracks backed by a common graph");
  double total = 0.0;
  const auto& h_ids = H.edge_ids();
  for (std::size_t i = 0; i < K.edge_ids().size(); ++i) {
    if (!std::binary_search(h_ids.begin(), h_ids.end(), K.edge_ids()[i]))
      total += detail::segment_surface_energy(K.segment(i), phi);
  }
  return total;
}

}  // namespace fractura
