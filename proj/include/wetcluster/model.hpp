#pragma once

// Instance description and the arc-level cluster representation.
//
// Regions are indexed 0..N (0 is the exterior chamber; on the ball it is the
// complement of the unit disk) and kWet for the unpenalized region G. Every
// interface is an open run of arcs with one region on each side; on the ball
// the circle itself is carried as interfaces against region 0 so that region
// areas can be recovered from interfaces alone.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wetcluster/geometry.hpp"

namespace wetcluster {

inline constexpr int kWet = -1;
inline constexpr int kExterior = 0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::string region_name(int r) { return r == kWet ? "G" : std::to_string(r); }

// ---------------------------------------------------------------------------
// Weights

struct Weights {
  std::vector<double> c;  // c_0 ... c_N

  int chambers() const { return static_cast<int>(c.size()) - 1; }
  // Surface tension of a region; the wet region is unpenalized.
  double of(int region) const { return region == kWet ? 0.0 : c.at(static_cast<std::size_t>(region)); }
  double pair(int a, int b) const { return a == b ? 0.0 : of(a) + of(b); }
  bool all_equal() const {
    return std::all_of(c.begin(), c.end(), [&](double v) { return v == c.front(); });
  }
};

inline Weights equal_weights(int chambers) { return {std::vector<double>(chambers + 1, 1.0)}; }

struct TriangleCheck {
  bool ok = true;
  std::optional<std::array<int, 3>> violating;  // (l, m, i) with c_lm >= c_li + c_im
  std::string message;
};

// Strict triangle inequalities c_lm < c_li + c_im among pair costs
// c_lm = c_l + c_m; equivalent to positivity of every weight.
inline TriangleCheck check_triangle(const Weights& w) {
  TriangleCheck r;
  const int n = static_cast<int>(w.c.size());
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i) {
        if (l == m || m == i || l == i) continue;
        const double lhs = w.c[l] + w.c[m];
        const double rhs = (w.c[l] + w.c[i]) + (w.c[i] + w.c[m]);
        if (!(lhs < rhs)) {
          r.ok = false;
          r.violating = std::array<int, 3>{l, m, i};
          r.message = "c_" + std::to_string(l) + std::to_string(m) + " >= c_" + std::to_string(l) +
                      std::to_string(i) + " + c_" + std::to_string(i) + std::to_string(m);
          return r;
        }
      }
  for (int l = 0; l < n; ++l)
    if (!(w.c[l] > 0.0) || !std::isfinite(w.c[l])) {
      r.ok = false;
      r.message = "weight c_" + std::to_string(l) + " is not positive";
      return r;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Boundary trace h on the unit circle

struct TraceJump {
  double angle = 0.0;  // where the arc carrying `label` starts
  int label = 1;
};

// The arc starting at jumps[i].angle and ending at the next angle (cyclic)
// carries jumps[i].label. A single entry is a constant trace (no jumps).
struct BoundaryTrace {
  std::vector<TraceJump> jumps;

  bool constant() const { return jumps.size() <= 1; }
  std::size_t jump_count() const { return jumps.size() <= 1 ? 0 : jumps.size(); }

  // End angle of arc i, unwrapped so that it exceeds the start angle.
  double arc_end(std::size_t i) const {
    if (constant()) return jumps[0].angle + kTwoPi;
    const double next = jumps[(i + 1) % jumps.size()].angle;
    return i + 1 == jumps.size() ? next + kTwoPi : next;
  }

  int label_at(double angle) const {
    if (constant()) return jumps[0].label;
    double t = std::fmod(angle, kTwoPi);
    if (t < 0) t += kTwoPi;
    for (std::size_t i = 0; i < jumps.size(); ++i) {
      const double a = jumps[i].angle, b = arc_end(i);
      if ((t >= a && t < b) || (t + kTwoPi >= a && t + kTwoPi < b)) return jumps[i].label;
    }
    return jumps.back().label;
  }

  Point2 jump_point(std::size_t i) const { return polar(1.0, jumps[i].angle); }
};

inline void check_trace(const BoundaryTrace& h, int chambers) {
  if (h.jumps.empty()) throw InvalidInput("trace needs at least one entry");
  for (std::size_t i = 0; i < h.jumps.size(); ++i) {
    const auto& j = h.jumps[i];
    if (!std::isfinite(j.angle) || j.angle < 0.0 || j.angle >= kTwoPi)
      throw InvalidInput("trace angle " + std::to_string(i) + " outside [0, 2pi)");
    if (j.label < 1 || j.label > chambers)
      throw InvalidInput("trace label " + std::to_string(j.label) + " outside 1.." + std::to_string(chambers));
    if (i > 0 && !(j.angle > h.jumps[i - 1].angle))
      throw InvalidInput("trace angles must be strictly increasing");
    if (h.jumps.size() > 1 && j.label == h.jumps[(i + 1) % h.jumps.size()].label)
      throw InvalidInput("adjacent trace labels must differ (entry " + std::to_string(i) + ")");
  }
}

// Open circular segment between boundary arc i of the trace and its chord.
struct CircularSegment {
  int label = 0;
  double start = 0.0;  // arc angles, end > start
  double end = 0.0;
  Point2 p0, p1;  // chord endpoints

  // Strictly inside the unit disk and strictly on the arc side of the chord.
  bool contains(Point2 q, double margin = 0.0) const {
    if (norm(q) >= 1.0 - margin) return false;
    if (end - start >= kTwoPi) return true;
    // arc side: the arc midpoint's side of the chord line
    const Point2 mid = polar(1.0, 0.5 * (start + end));
    const double side_mid = cross(p1 - p0, mid - p0);
    const double side_q = cross(p1 - p0, q - p0) / norm(p1 - p0);
    return side_mid > 0 ? side_q > margin : side_q < -margin;
  }
};

inline std::vector<CircularSegment> circular_segments(const BoundaryTrace& h) {
  std::vector<CircularSegment> out;
  for (std::size_t i = 0; i < h.jumps.size(); ++i) {
    CircularSegment s;
    s.label = h.jumps[i].label;
    s.start = h.jumps[i].angle;
    s.end = h.arc_end(i);
    s.p0 = polar(1.0, s.start);
    s.p1 = polar(1.0, s.end);
    out.push_back(s);
  }
  return out;
}

// Constant term of the ball energy: 2 pi c_0 + sum_l c_l |{h = l}|.
inline double boundary_constant(const BoundaryTrace& h, const Weights& w) {
  double s = kTwoPi * w.of(0);
  for (std::size_t i = 0; i < h.jumps.size(); ++i) s += w.of(h.jumps[i].label) * (h.arc_end(i) - h.jumps[i].angle);
  return s;
}

// ---------------------------------------------------------------------------
// Instances

enum class Domain { ball, plane };

inline std::string domain_name(Domain d) { return d == Domain::ball ? "ball" : "plane"; }

struct InstanceSpec {
  Domain domain = Domain::ball;
  Weights weights;
  double delta = 0.0;
  std::optional<BoundaryTrace> trace;          // ball
  std::optional<std::vector<double>> masses;   // plane

  int chambers() const { return weights.chambers(); }
};

// Structural checks; throws InvalidInput for malformed data and Infeasible
// for well-formed but unrealizable constraints.
inline void check_spec(const InstanceSpec& s) {
  if (s.weights.c.size() < 2) throw InvalidInput("weights need c_0 and at least one chamber");
  const auto tri = check_triangle(s.weights);
  if (!tri.ok) throw InvalidInput("weights: " + tri.message);
  if (!std::isfinite(s.delta) || s.delta < 0.0) throw InvalidInput("delta must be finite and >= 0");
  if (s.domain == Domain::ball) {
    if (!s.trace || s.masses) throw InvalidInput("ball instance needs a trace and no masses");
    check_trace(*s.trace, s.chambers());
    if (s.delta >= std::numbers::pi) throw Infeasible("delta exceeds the disk area");
  } else {
    if (!s.masses || s.trace) throw InvalidInput("plane instance needs masses and no trace");
    if (static_cast<int>(s.masses->size()) != s.chambers())
      throw InvalidInput("plane instance needs one mass per chamber");
    for (double m : *s.masses)
      if (!(m > 0.0) || !std::isfinite(m)) throw InvalidInput("masses must be positive");
  }
}

// ---------------------------------------------------------------------------
// Arc clusters

enum class JunctionKind { interior_cusp, boundary_corner, interior_triple, boundary_jump, boundary_triple };

inline std::string junction_kind_name(JunctionKind k) {
  switch (k) {
    case JunctionKind::interior_cusp: return "interior-cusp";
    case JunctionKind::boundary_corner: return "boundary-corner";
    case JunctionKind::interior_triple: return "interior-triple";
    case JunctionKind::boundary_jump: return "boundary-jump";
    case JunctionKind::boundary_triple: return "boundary-triple";
  }
  return "unknown";
}

struct Interface {
  ArcChain chain;  // open run; `left` lies to the left of the direction of travel
  int left = 0;
  int right = 0;
};

struct Junction {
  Point2 at;
  JunctionKind kind = JunctionKind::interior_triple;
  std::vector<int> interfaces;
};

struct ArcCluster {
  Domain domain = Domain::ball;
  int chambers = 0;
  std::vector<Interface> interfaces;
  std::vector<Junction> junctions;
};

inline bool valid_region(const ArcCluster& c, int r) { return r == kWet || (r >= 0 && r <= c.chambers); }

// Structural validity: arcs representable, runs connected, labels in range,
// distinct sides, wet interfaces facing a chamber. Throws InvalidInput.
inline void check_structure(const ArcCluster& c) {
  if (c.chambers < 1) throw InvalidInput("cluster has no chambers");
  for (std::size_t i = 0; i < c.interfaces.size(); ++i) {
    const auto& f = c.interfaces[i];
    const std::string where = "interface " + std::to_string(i);
    if (f.chain.arcs.empty()) throw InvalidInput(where + " is empty");
    for (const auto& a : f.chain.arcs) check_arc(a);
    check_connected(f.chain, 1e-9);
    if (!valid_region(c, f.left) || !valid_region(c, f.right))
      throw InvalidInput(where + " has a region index out of range");
    if (f.left == f.right) throw InvalidInput(where + " separates a region from itself");
    if ((f.left == kWet && f.right == kWet)) throw InvalidInput(where + " has G on both sides");
  }
  for (std::size_t j = 0; j < c.junctions.size(); ++j)
    for (int id : c.junctions[j].interfaces)
      if (id < 0 || id >= static_cast<int>(c.interfaces.size()))
        throw InvalidInput("junction " + std::to_string(j) + " references a missing interface");
}

// Energy sum_l c_l P(S_l): every interface contributes length * (c_left +
// c_right) with c_G = 0. On the ball, interfaces along the circle are
// dropped, giving the relative energy F(S; B).
inline double energy(const ArcCluster& c, const Weights& w) {
  check_structure(c);
  if (w.chambers() != c.chambers) throw InvalidInput("weights do not match the cluster's chamber count");
  double e = 0.0;
  for (const auto& f : c.interfaces) {
    if (c.domain == Domain::ball && (f.left == kExterior || f.right == kExterior)) continue;
    e += chain_length(f.chain) * w.pair(f.left, f.right);
  }
  return e;
}

// Area of a region recovered from its bounding interfaces (Green's theorem
// is additive over arcs, so no chaining is needed).
inline double region_area(const ArcCluster& c, int region) {
  double s = 0.0;
  for (const auto& f : c.interfaces) {
    double t = 0.0;
    for (const auto& a : f.chain.arcs) t += signed_area_term(a);
    if (f.left == region) s += t;
    if (f.right == region) s -= t;
  }
  return s;
}

// Closed boundary cycles of a region, oriented with the region on the left.
inline std::vector<ArcChain> region_cycles(const ArcCluster& c, int region, double tol = 1e-9) {
  std::vector<CircArc> pieces;
  for (const auto& f : c.interfaces) {
    if (f.left == region)
      for (const auto& a : f.chain.arcs) pieces.push_back(a);
    if (f.right == region)
      for (auto it = f.chain.arcs.rbegin(); it != f.chain.arcs.rend(); ++it) pieces.push_back(reversed(*it));
  }
  std::vector<ArcChain> cycles;
  std::vector<bool> used(pieces.size(), false);
  for (std::size_t s = 0; s < pieces.size(); ++s) {
    if (used[s]) continue;
    ArcChain chain;
    chain.closed = true;
    std::size_t cur = s;
    used[cur] = true;
    chain.arcs.push_back(pieces[cur]);
    while (distance(chain.arcs.back().end, chain.arcs.front().start) > tol) {
      std::size_t best = pieces.size();
      double best_d = tol;
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (used[k]) continue;
        const double d = distance(pieces[k].start, chain.arcs.back().end);
        if (d <= best_d) {
          best = k;
          best_d = d;
        }
      }
      if (best == pieces.size())
        throw InvalidInput("boundary of region " + region_name(region) + " does not close");
      used[best] = true;
      chain.arcs.push_back(pieces[best]);
    }
    cycles.push_back(std::move(chain));
  }
  return cycles;
}

// Point membership by crossing parity over the region's polygonized boundary.
inline bool region_contains(const ArcCluster& c, int region, Point2 q) {
  bool inside = false;
  for (const auto& f : c.interfaces) {
    if (f.left != region && f.right != region) continue;
    for (const auto& a : f.chain.arcs) {
      const auto pts = polygonize(a, 0.01);
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point2 u = pts[i], v = pts[i + 1];
        if ((u.y > q.y) != (v.y > q.y)) {
          const double x = u.x + (q.y - u.y) * (v.x - u.x) / (v.y - u.y);
          if (q.x < x) inside = !inside;
        }
      }
    }
  }
  return inside;
}

// Convexity of every component: no negative turn at vertices and no arc
// bending away from the region (region on the left, counter-clockwise).
inline bool region_is_convex(const ArcCluster& c, int region, double angle_tol = 1e-9) {
  for (const auto& cyc : region_cycles(c, region)) {
    double turning = 0.0;
    const std::size_t n = cyc.arcs.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = cyc.arcs[i];
      const auto& b = cyc.arcs[(i + 1) % n];
      if (a.curvature < -1e-12) return false;
      turning += subtended_angle(a) * (a.curvature > 0 ? 1.0 : 0.0);
      const Point2 ta = endpoint_tangent(a, false), tb = endpoint_tangent(b, true);
      const double turn = std::atan2(cross(ta, tb), dot(ta, tb));
      if (turn < -angle_tol) return false;
      turning += turn;
    }
    if (std::abs(turning - kTwoPi) > 1e-6) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Admissibility

struct ValidateOptions {
  double mass_rel_tol = 1e-8;
  double area_tol = 1e-10;
  int partition_samples = 400;
};

struct AdmissibilityReport {
  double wet_area = 0.0;
  bool wet_ok = true;
  bool trace_ok = true;        // ball
  bool masses_ok = true;       // plane
  bool containment_ok = true;  // ball: circular segments inside their chamber
  bool partition_ok = true;
  bool structure_ok = true;
  std::vector<double> chamber_areas;  // index 1..N (0 unused)
  std::vector<std::string> notes;

  bool passed() const {
    return structure_ok && wet_ok && trace_ok && masses_ok && containment_ok && partition_ok;
  }
};

inline AdmissibilityReport validate(const ArcCluster& c, const InstanceSpec& spec,
                                    const ValidateOptions& opt = {}) {
  AdmissibilityReport r;
  try {
    check_structure(c);
  } catch (const Error& e) {
    r.structure_ok = false;
    r.notes.push_back(e.what());
    return r;
  }
  if (c.chambers != spec.chambers()) {
    r.structure_ok = false;
    r.notes.push_back("chamber count differs from instance");
    return r;
  }
  for (const auto& f : c.interfaces)
    if ((f.left == kWet && f.right == kExterior && c.domain == Domain::ball) ||
        (f.right == kWet && f.left == kExterior && c.domain == Domain::ball)) {
      r.structure_ok = false;
      r.notes.push_back("G touches the outside of the disk");
    }

  bool has_wet = false;
  for (const auto& f : c.interfaces) has_wet = has_wet || f.left == kWet || f.right == kWet;
  r.wet_area = has_wet ? region_area(c, kWet) : 0.0;
  r.wet_ok = r.wet_area <= spec.delta + opt.area_tol;
  if (!r.wet_ok) r.notes.push_back("|G| = " + std::to_string(r.wet_area) + " exceeds delta");

  r.chamber_areas.assign(c.chambers + 1, 0.0);
  for (int l = 1; l <= c.chambers; ++l) r.chamber_areas[l] = region_area(c, l);

  if (spec.domain == Domain::ball && spec.trace) {
    const auto& h = *spec.trace;
    // boundary interfaces must lie on the circle and carry the trace label
    double covered = 0.0;
    for (const auto& f : c.interfaces) {
      if (f.left != kExterior && f.right != kExterior) continue;
      const int inner = f.left == kExterior ? f.right : f.left;
      for (const auto& a : f.chain.arcs) {
        const CircArc ccw = f.left == kExterior ? reversed(a) : a;
        const bool on_circle = std::abs(norm(ccw.start) - 1.0) < 1e-9 && std::abs(norm(ccw.end) - 1.0) < 1e-9 &&
                               std::abs(ccw.curvature - 1.0) < 1e-9;
        if (!on_circle) {
          r.trace_ok = false;
          r.notes.push_back("boundary interface off the unit circle");
          continue;
        }
        covered += arc_length(ccw);
        const int want = h.label_at(angle_of(arc_midpoint(ccw)));
        if (want != inner) {
          r.trace_ok = false;
          r.notes.push_back("trace mismatch: chamber " + region_name(inner) + " on an arc where h = " +
                            std::to_string(want));
        }
      }
    }
    if (std::abs(covered - kTwoPi) > 1e-8) {
      r.trace_ok = false;
      r.notes.push_back("boundary coverage " + std::to_string(covered) + " != 2pi");
    }
    // no interior interface may enter a circular segment
    for (const auto& seg : circular_segments(h)) {
      if (h.constant()) break;
      for (const auto& f : c.interfaces) {
        if (f.left == kExterior || f.right == kExterior) continue;
        bool bad = false;
        for (const auto& a : f.chain.arcs)
          for (const auto& p : sample_arc(a, 256)) bad = bad || seg.contains(p, 1e-9);
        if (bad) {
          r.containment_ok = false;
          r.notes.push_back("interface " + region_name(f.left) + "|" + region_name(f.right) +
                            " enters the circular segment of label " + std::to_string(seg.label));
          break;
        }
      }
    }
  }
  if (spec.domain == Domain::plane && spec.masses) {
    for (int l = 1; l <= c.chambers; ++l) {
      const double m = (*spec.masses)[l - 1];
      if (std::abs(r.chamber_areas[l] - m) > opt.mass_rel_tol * m) {
        r.masses_ok = false;
        r.notes.push_back("chamber " + std::to_string(l) + " area " + std::to_string(r.chamber_areas[l]) +
                          " != mass " + std::to_string(m));
      }
    }
  }

  // Sampled points must belong to exactly one region.
  if (c.domain == Domain::ball) {
    const int n = opt.partition_samples;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<int> regions;
    for (int l = 1; l <= c.chambers; ++l) regions.push_back(l);
    if (has_wet) regions.push_back(kWet);
    // each interface must have its labeled regions on the stated sides
    for (const auto& f : c.interfaces) {
      const CircArc& a = f.chain.arcs[f.chain.arcs.size() / 2];
      const Point2 m = arc_midpoint(a);
      const Point2 nrm = perp_left(endpoint_tangent({a.start, m, a.curvature}, false));
      const double eps = std::min(1e-3, 0.05 * arc_length(a));
      for (const auto& [side, reg] : {std::pair{1.0, f.left}, std::pair{-1.0, f.right}}) {
        const Point2 q = m + side * eps * nrm;
        const bool ok = reg == kExterior ? norm(q) > 1.0 : region_contains(c, reg, q);
        if (!ok && r.partition_ok) {
          r.partition_ok = false;
          r.notes.push_back("interface " + region_name(f.left) + "|" + region_name(f.right) +
                            " has region " + region_name(reg) + " on the wrong side");
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      const Point2 q = polar(0.98 * std::sqrt((i + 0.5) / n), golden * i);
      int hits = 0;
      for (int reg : regions) hits += region_contains(c, reg, q);
      if (hits != 1) {
        r.partition_ok = false;
        r.notes.push_back("sample (" + std::to_string(q.x) + ", " + std::to_string(q.y) + ") lies in " +
                          std::to_string(hits) + " regions");
        break;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Ball boundary helpers

// Counter-clockwise arcs of the unit circle from angle a to angle b (b > a),
// split so that no piece exceeds a quarter turn.
inline std::vector<CircArc> circle_arcs(double a, double b) {
  std::vector<CircArc> out;
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / (std::numbers::pi / 2) - 1e-12)));
  Point2 prev = polar(1.0, a);
  for (int i = 1; i <= n; ++i) {
    const Point2 next = i == n ? polar(1.0, b) : polar(1.0, a + (b - a) * i / n);
    out.push_back({prev, next, 1.0});
    prev = next;
  }
  return out;
}

// The circle as interfaces between the trace's chambers and region 0.
inline std::vector<Interface> boundary_interfaces(const BoundaryTrace& h) {
  std::vector<Interface> out;
  for (std::size_t i = 0; i < h.jumps.size(); ++i) {
    Interface f;
    f.left = h.jumps[i].label;
    f.right = kExterior;
    f.chain.arcs = circle_arcs(h.jumps[i].angle, h.arc_end(i));
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace wetcluster
