#pragma once

// Planar geometry for constant-curvature arcs, closed arc chains and
// polygons. Arcs are stored by endpoints plus signed curvature; positive
// curvature turns counter-clockwise (center to the left of the chord).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wetcluster/error.hpp"

namespace wetcluster {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
  friend Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline Point2 perp_left(Point2 a) { return {-a.y, a.x}; }
inline Point2 unit(Point2 a) { return a / norm(a); }
inline Point2 polar(double radius, double angle) {
  return {radius * std::cos(angle), radius * std::sin(angle)};
}
inline Point2 rotate(Point2 a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Angle in [0, 2pi).
inline double angle_of(Point2 a) {
  double t = std::atan2(a.y, a.x);
  if (t < 0) t += 2 * std::numbers::pi;
  if (t >= 2 * std::numbers::pi) t -= 2 * std::numbers::pi;
  return t;
}

// ---------------------------------------------------------------------------
// CircArc

struct CircArc {
  Point2 start;
  Point2 end;
  double curvature = 0.0;  // signed, 0 = straight segment
};

inline constexpr double kSeriesThreshold = 1e-6;

inline double chord_length(const CircArc& a) { return distance(a.start, a.end); }

// Throws InvalidInput unless the arc is representable: finite data, distinct
// endpoints, and a chord that fits on a circle of radius 1/|curvature|.
inline void check_arc(const CircArc& a) {
  if (!is_finite(a.start) || !is_finite(a.end) || !std::isfinite(a.curvature))
    throw InvalidInput("arc has non-finite data");
  const double c = chord_length(a);
  if (c == 0.0) throw InvalidInput("arc has coincident endpoints");
  if (std::abs(a.curvature) * c > 2.0 * (1.0 + 1e-12))
    throw InvalidInput("arc chord " + std::to_string(c) + " too long for curvature " +
                       std::to_string(a.curvature));
}

// Half of |curvature| * chord, clamped to the valid range.
inline double half_chord_ratio(const CircArc& a) {
  return std::min(1.0, 0.5 * std::abs(a.curvature) * chord_length(a));
}

// Central angle in [0, pi]; zero for segments.
inline double subtended_angle(const CircArc& a) {
  check_arc(a);
  return 2.0 * std::asin(half_chord_ratio(a));
}

inline double arc_length(const CircArc& a) {
  check_arc(a);
  const double c = chord_length(a);
  const double x = half_chord_ratio(a);
  if (x < 0.5 * kSeriesThreshold) {
    // asin(x)/x = 1 + x^2/6 + 3x^4/40 + O(x^6)
    const double x2 = x * x;
    return c * (1.0 + x2 / 6.0 + 3.0 * x2 * x2 / 40.0);
  }
  return 2.0 * std::asin(x) / std::abs(a.curvature);
}

inline double arc_radius(const CircArc& a) {
  if (a.curvature == 0.0) throw InvalidInput("straight segment has no finite radius");
  return 1.0 / std::abs(a.curvature);
}

inline Point2 arc_center(const CircArc& a) {
  check_arc(a);
  const double r = arc_radius(a);
  const double half = 0.5 * chord_length(a);
  const Point2 mid = 0.5 * (a.start + a.end);
  const Point2 n = perp_left(unit(a.end - a.start));
  const double h = std::sqrt(std::max(0.0, r * r - half * half));
  return a.curvature > 0 ? mid + h * n : mid - h * n;
}

// Area between the arc and its chord (unsigned).
inline double segment_area(const CircArc& a) {
  check_arc(a);
  const double k = std::abs(a.curvature);
  if (k == 0.0) return 0.0;
  const double c = chord_length(a);
  if (0.5 * k * c < 0.5 * kSeriesThreshold) return k * c * c * c / 12.0;
  const double theta = subtended_angle(a);
  return 0.5 / (k * k) * (theta - std::sin(theta));
}

// Contribution of the arc to the signed area of a closed chain (Green's
// theorem); counter-clockwise chains have positive total.
inline double signed_area_term(const CircArc& a) {
  const double tri = 0.5 * cross(a.start, a.end);
  if (a.curvature == 0.0) return tri;
  return tri + (a.curvature > 0 ? segment_area(a) : -segment_area(a));
}

inline CircArc reversed(const CircArc& a) { return {a.end, a.start, -a.curvature}; }

// Unit tangent in the direction of travel.
inline Point2 endpoint_tangent(const CircArc& a, bool at_start) {
  check_arc(a);
  const Point2 dir = unit(a.end - a.start);
  if (a.curvature == 0.0) return dir;
  const double half = 0.5 * subtended_angle(a);
  const double s = a.curvature > 0 ? 1.0 : -1.0;
  return rotate(dir, at_start ? -s * half : s * half);
}

// Point at arc-length fraction t in [0, 1].
inline Point2 arc_point(const CircArc& a, double t) {
  if (a.curvature == 0.0 || half_chord_ratio(a) < 0.5 * kSeriesThreshold)
    return a.start + t * (a.end - a.start);
  const Point2 c = arc_center(a);
  const double theta = subtended_angle(a);
  const double s = a.curvature > 0 ? 1.0 : -1.0;
  return c + rotate(a.start - c, s * theta * t);
}

inline Point2 arc_midpoint(const CircArc& a) { return arc_point(a, 0.5); }

// Polyline through the arc with at most max_step radians per piece; always
// includes both endpoints.
inline std::vector<Point2> polygonize(const CircArc& a, double max_step = 0.02) {
  check_arc(a);
  const double theta = subtended_angle(a);
  const int n = std::max(1, static_cast<int>(std::ceil(theta / max_step)));
  std::vector<Point2> pts;
  pts.reserve(n + 1);
  pts.push_back(a.start);
  for (int i = 1; i < n; ++i) pts.push_back(arc_point(a, static_cast<double>(i) / n));
  pts.push_back(a.end);
  return pts;
}

// n + 1 points evenly spaced by arc length, endpoints included.
inline std::vector<Point2> sample_arc(const CircArc& a, int n) {
  std::vector<Point2> pts;
  pts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) pts.push_back(arc_point(a, static_cast<double>(i) / n));
  return pts;
}

// Arc through p and q with the given circle center, taking the minor arc.
inline CircArc arc_about(Point2 p, Point2 q, Point2 center) {
  const double r = 0.5 * (distance(center, p) + distance(center, q));
  const double side = cross(q - p, center - p);
  return {p, q, side > 0 ? 1.0 / r : -1.0 / r};
}

// ---------------------------------------------------------------------------
// ArcChain

struct ArcChain {
  std::vector<CircArc> arcs;
  bool closed = false;
};

inline double chain_length(const ArcChain& c) {
  double s = 0.0;
  for (const auto& a : c.arcs) s += arc_length(a);
  return s;
}

inline void check_connected(const ArcChain& c, double tol = 1e-12) {
  for (std::size_t i = 0; i + 1 < c.arcs.size(); ++i)
    if (distance(c.arcs[i].end, c.arcs[i + 1].start) > tol)
      throw InvalidInput("chain arcs " + std::to_string(i) + " and " +
                         std::to_string(i + 1) + " do not share an endpoint");
  if (c.closed && !c.arcs.empty() &&
      distance(c.arcs.back().end, c.arcs.front().start) > tol)
    throw InvalidInput("closed chain does not wrap around");
}

namespace detail {

inline int orientation(Point2 a, Point2 b, Point2 c, double eps) {
  const double v = cross(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

inline bool on_segment(Point2 a, Point2 b, Point2 p, double eps) {
  return std::min(a.x, b.x) - eps <= p.x && p.x <= std::max(a.x, b.x) + eps &&
         std::min(a.y, b.y) - eps <= p.y && p.y <= std::max(a.y, b.y) + eps;
}

}  // namespace detail

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d, double eps = 1e-14) {
  const int o1 = detail::orientation(a, b, c, eps), o2 = detail::orientation(a, b, d, eps);
  const int o3 = detail::orientation(c, d, a, eps), o4 = detail::orientation(c, d, b, eps);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && detail::on_segment(a, b, c, eps)) return true;
  if (o2 == 0 && detail::on_segment(a, b, d, eps)) return true;
  if (o3 == 0 && detail::on_segment(c, d, a, eps)) return true;
  if (o4 == 0 && detail::on_segment(c, d, b, eps)) return true;
  return false;
}

// Closed polyline approximation of a closed chain (last point not repeated).
inline std::vector<Point2> chain_polyline(const ArcChain& c, double max_step = 0.02) {
  std::vector<Point2> ring;
  for (const auto& a : c.arcs) {
    auto pts = polygonize(a, max_step);
    ring.insert(ring.end(), pts.begin(), pts.end() - 1);
  }
  return ring;
}

// True when the closed chain has no self-intersections other than shared
// endpoints of consecutive pieces.
inline bool is_simple(const ArcChain& c) {
  const auto ring = chain_polyline(c, 0.05);
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

inline double chain_signed_area(const ArcChain& c) {
  double s = 0.0;
  for (const auto& a : c.arcs) s += signed_area_term(a);
  return s;
}

// Enclosed area of a closed simple chain.
inline double chain_area(const ArcChain& c) {
  if (!c.closed) throw InvalidInput("chain_area requires a closed chain");
  if (c.arcs.empty()) return 0.0;
  check_connected(c);
  if (!is_simple(c)) throw InvalidInput("chain is self-intersecting");
  return std::abs(chain_signed_area(c));
}

// ---------------------------------------------------------------------------
// Wetted junction: the concave region between three mutually tangent
// circles of equal radius.

struct CurvilinearTriangle {
  ArcChain boundary;               // counter-clockwise, three arcs of curvature -1/r
  std::array<Point2, 3> cusps{};   // cusp k is shared by arcs k-1 and k
  std::array<Point2, 3> centers{}; // circle center of arc k
  Point2 centroid{};
  double radius = 0.0;
  double arc_length = 0.0;  // per arc
  double area = 0.0;
};

inline double curvilinear_triangle_area(double r) {
  return (std::sqrt(3.0) - std::numbers::pi / 2.0) * r * r;
}

// Cusp k lies at direction first_cusp_angle + k*2pi/3 at distance r/sqrt(3)
// from the centroid.
inline CurvilinearTriangle curvilinear_triangle(double r, Point2 centroid = {},
                                                double first_cusp_angle = -std::numbers::pi / 2) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("curvilinear_triangle: radius must be >= 0");
  CurvilinearTriangle t;
  t.radius = r;
  t.centroid = centroid;
  t.boundary.closed = true;
  const double step = 2.0 * std::numbers::pi / 3.0;
  const double cusp_dist = r / std::sqrt(3.0);
  const double center_dist = 2.0 * r / std::sqrt(3.0);
  for (int k = 0; k < 3; ++k) {
    t.cusps[k] = centroid + polar(cusp_dist, first_cusp_angle + k * step);
    t.centers[k] = centroid + polar(center_dist, first_cusp_angle + k * step + step / 2);
  }
  if (r == 0.0) return t;
  for (int k = 0; k < 3; ++k)
    t.boundary.arcs.push_back({t.cusps[k], t.cusps[(k + 1) % 3], -1.0 / r});
  t.arc_length = std::numbers::pi / 3.0 * r;
  t.area = curvilinear_triangle_area(r);
  return t;
}

// ---------------------------------------------------------------------------
// Polygons

using Polygon = std::vector<Point2>;

inline double polygon_signed_area(std::span<const Point2> p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * s;
}

inline double polygon_perimeter(std::span<const Point2> p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += distance(p[i], p[(i + 1) % p.size()]);
  return s;
}

// Crossing-number point-in-polygon (boundary points are unspecified).
inline bool point_in_polygon(std::span<const Point2> poly, Point2 q) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > q.y) != (b.y > q.y)) {
      const double x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (q.x < x) inside = !inside;
    }
  }
  return inside;
}

// Convexity by a turning-direction scan: every non-degenerate turn has the
// same sign and the boundary winds exactly once.
inline bool is_convex(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  int sign = 0;
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n], c = poly[(i + 2) % n];
    const Point2 u = b - a, v = c - b;
    if (norm(u) == 0.0 || norm(v) == 0.0) return false;
    const double cr = cross(u, v);
    const int s = cr > 1e-14 * norm(u) * norm(v) ? 1 : (cr < -1e-14 * norm(u) * norm(v) ? -1 : 0);
    if (s != 0) {
      if (sign != 0 && s != sign) return false;
      sign = s;
    }
    turning += std::atan2(cr, dot(u, v));
  }
  return sign != 0 && std::abs(std::abs(turning) - 2.0 * std::numbers::pi) < 1e-6;
}

inline Polygon counter_clockwise(Polygon p) {
  if (polygon_signed_area(p) < 0) std::reverse(p.begin(), p.end());
  return p;
}

// Parameter range [t0, t1] of segment a->b inside a counter-clockwise convex
// polygon (Cyrus-Beck); nullopt when disjoint.
inline std::optional<std::pair<double, double>> clip_segment_convex(Point2 a, Point2 b,
                                                                     std::span<const Point2> k) {
  double t0 = 0.0, t1 = 1.0;
  const Point2 d = b - a;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const Point2 p = k[i], q = k[(i + 1) % k.size()];
    const Point2 e = q - p;
    // inside: cross(e, x - p) >= 0
    const double num = cross(e, a - p);
    const double den = cross(e, d);
    if (den == 0.0) {
      if (num < 0) return std::nullopt;
      continue;
    }
    const double t = -num / den;
    if (den > 0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

// Sutherland-Hodgman clip of an arbitrary simple polygon by a convex one.
inline Polygon sutherland_hodgman(const Polygon& subject, std::span<const Point2> k) {
  Polygon out = subject;
  for (std::size_t i = 0; i < k.size() && !out.empty(); ++i) {
    const Point2 p = k[i], q = k[(i + 1) % k.size()];
    const auto inside = [&](Point2 x) { return cross(q - p, x - p) >= 0.0; };
    const auto intersect = [&](Point2 a, Point2 b) {
      const double da = cross(q - p, a - p), db = cross(q - p, b - p);
      return a + (da / (da - db)) * (b - a);
    };
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Point2 cur = in[j], prev = in[(j + in.size() - 1) % in.size()];
      if (inside(cur)) {
        if (!inside(prev)) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (inside(prev)) {
        out.push_back(intersect(prev, cur));
      }
    }
  }
  return out;
}

struct ClipReport {
  Polygon clipped;  // may contain zero-width bridges along the clip boundary
  double perimeter_in = 0.0;
  double perimeter_out = 0.0;
  double area_in = 0.0;
  double area_out = 0.0;
  double area_removed = 0.0;
  bool strict = false;  // perimeter_out < perimeter_in
};

// Intersection of a simple polygon E with a convex polygon K. The output
// perimeter is measured exactly as |dE inside K| + |dK inside E|, so bridges
// produced by the clipper never count.
inline ClipReport convex_clip(const Polygon& e, const Polygon& k_in) {
  if (e.size() < 3) throw InvalidInput("convex_clip: polygon needs at least 3 vertices");
  if (!is_convex(k_in)) throw InvalidInput("convex_clip: clip region is not convex");
  const Polygon k = counter_clockwise(k_in);
  ClipReport r;
  r.perimeter_in = polygon_perimeter(e);
  r.area_in = std::abs(polygon_signed_area(e));
  r.clipped = sutherland_hodgman(counter_clockwise(e), k);
  r.area_out = r.clipped.size() >= 3 ? std::abs(polygon_signed_area(r.clipped)) : 0.0;
  r.area_removed = std::max(0.0, r.area_in - r.area_out);

  double inside_len = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Point2 a = e[i], b = e[(i + 1) % e.size()];
    if (auto t = clip_segment_convex(a, b, k)) inside_len += (t->second - t->first) * distance(a, b);
  }
  const double scale = std::max(1.0, r.perimeter_in);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const Point2 a = k[i], b = k[(i + 1) % k.size()];
    std::vector<double> ts{0.0, 1.0};
    for (std::size_t j = 0; j < e.size(); ++j) {
      const Point2 c = e[j], d = e[(j + 1) % e.size()];
      const double den = cross(b - a, d - c);
      if (den == 0.0) continue;
      const double t = cross(c - a, d - c) / den;
      const double s = cross(c - a, b - a) / den;
      if (t > 0.0 && t < 1.0 && s >= 0.0 && s <= 1.0) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t j = 0; j + 1 < ts.size(); ++j) {
      if (ts[j + 1] - ts[j] <= 0.0) continue;
      const Point2 m = a + 0.5 * (ts[j] + ts[j + 1]) * (b - a);
      bool on_edge = false;
      for (std::size_t q = 0; q < e.size() && !on_edge; ++q) {
        const Point2 c = e[q], d = e[(q + 1) % e.size()];
        on_edge = std::abs(cross(d - c, m - c)) <= 1e-13 * scale * norm(d - c) &&
                  detail::on_segment(c, d, m, 1e-13 * scale);
      }
      if (!on_edge && point_in_polygon(e, m)) inside_len += (ts[j + 1] - ts[j]) * distance(a, b);
    }
  }
  r.perimeter_out = inside_len;
  r.strict = r.perimeter_out < r.perimeter_in - 1e-12 * scale;
  return r;
}

}  // namespace wetcluster
