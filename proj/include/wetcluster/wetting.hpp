#pragma once

// Wetted clusters for small delta: every triple junction of a dry network is
// replaced by a piece of G bounded by circle arcs that share one curvature
// (equal weights) and meet the retained dry segments tangentially.
//
// Interior junction: the curvilinear triangle of three mutually tangent
// circles of radius r, cusps on the incident segments at r / sqrt(3).
//
// Boundary triple junction at a jump point x with dry segments x-A and x-B
// (chamber n in the wedge between them): a corner piece bounded by
//   a1: x -> c1 against the chamber beyond x-A,
//   a3: c1 -> c2 against n,
//   a2: c2 -> x against the chamber beyond x-B,
// with cusps c1, c2 where the retained segments A-c1 and B-c2 touch both
// adjacent arcs. A and B stay fixed; the segments pivot about them.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wetcluster/dry_solver.hpp"

namespace wetcluster {

inline double triangle_area_factor() { return std::sqrt(3.0) - std::numbers::pi / 2.0; }

// Constant c of the per-chamber length change c * sqrt(A) when one third of
// a wetted junction (area A) replaces a corner; negative.
inline double remark_constant() {
  return (std::numbers::pi / 3.0 - 2.0 / std::sqrt(3.0)) / std::sqrt(triangle_area_factor() / 3.0);
}

// Energy change when an interior equal-weight junction is wetted with radius r.
inline double interior_energy_change(double r) { return (std::numbers::pi - 2.0 * std::sqrt(3.0)) * r; }

struct WettingParams {
  double r = 0.0;      // common arc radius
  double kappa = 0.0;  // 1 / r, 0 when nothing is wetted
  int interior = 0;    // interior junctions P
  int boundary = 0;    // boundary triple junctions
  double interior_piece_area = 0.0;  // (sqrt3 - pi/2) r^2 per interior junction
  double third_area = 0.0;           // A_delta = delta / (3P) when all junctions are interior
  bool nothing_to_wet = false;
};

struct WetPiece {
  int node = 0;  // network node id of the junction
  bool boundary = false;
  ArcChain boundary_chain;       // counter-clockwise around G
  std::vector<int> chambers;     // chamber across each arc
  std::vector<Point2> cusps;
  std::optional<Point2> corner;  // boundary corner on the circle
  double area = 0.0;
};

struct WettedCluster {
  JunctionNetwork base;
  WettingParams params;
  std::vector<WetPiece> pieces;
  ArcCluster cluster;
  double dry_energy = 0.0;
  double predicted_energy = 0.0;
};

// ---------------------------------------------------------------------------
// Interior junctions

namespace detail {

struct Incident {
  int edge = 0;
  int other = 0;
  Point2 dir;     // unit, away from the junction
  int ccw = 0;    // chamber counter-clockwise of the ray
  int cw = 0;     // chamber clockwise of the ray
};

inline std::vector<Incident> incident_rays(const JunctionNetwork& n, int node) {
  std::vector<Incident> out;
  const Point2 x = n.node(node);
  for (std::size_t k = 0; k < n.topology.edges.size(); ++k) {
    const auto& e = n.topology.edges[k];
    if (e.u == node) out.push_back({static_cast<int>(k), e.v, unit(n.node(e.v) - x), e.left, e.right});
    else if (e.v == node) out.push_back({static_cast<int>(k), e.u, unit(n.node(e.u) - x), e.right, e.left});
  }
  std::sort(out.begin(), out.end(), [](const Incident& a, const Incident& b) { return angle_of(a.dir) < angle_of(b.dir); });
  return out;
}

}  // namespace detail

// Curvilinear triangle at an interior 120-degree junction, rotated so that
// its cusps sit on the incident segments.
inline WetPiece wet_interior_junction(const JunctionNetwork& n, int node, double r) {
  if (node < n.topology.jumps) throw InvalidInput("wet_interior_junction: node is not an interior junction");
  const auto rays = detail::incident_rays(n, node);
  if (rays.size() != 3) throw InvalidInput("wet_interior_junction: junction degree is not 3");
  for (std::size_t k = 0; k < 3; ++k) {
    const double gap = std::remainder(angle_of(rays[(k + 1) % 3].dir) - angle_of(rays[k].dir), kTwoPi);
    const double opening = gap < 0 ? gap + kTwoPi : gap;
    if (std::abs(opening - kTwoPi / 3) > 1e-6)
      throw InvalidInput("wet_interior_junction: incident angles are not 120 degrees (unequal weights?)");
  }
  const Point2 x = n.node(node);
  // the cusp sits r / sqrt3 along each ray; a segment whose far end is
  // wetted too (another junction or a boundary triple) is shared in halves
  for (const auto& ray : rays) {
    int degree = 0;
    for (const auto& e : n.topology.edges) degree += (e.u == ray.other) + (e.v == ray.other);
    const bool shared = ray.other >= n.topology.jumps || degree >= 2;
    const double room = (shared ? 0.5 : 1.0) * distance(x, n.node(ray.other));
    if (!(r / std::sqrt(3.0) < room))
      throw Infeasible("wet piece radius " + std::to_string(r) + " leaves no room on an incident segment");
  }
  WetPiece p;
  p.node = node;
  const auto tri = curvilinear_triangle(r, x, angle_of(rays[0].dir));
  p.cusps.assign(tri.cusps.begin(), tri.cusps.end());
  p.area = tri.area;
  if (r == 0.0) return p;
  // the triangle's cusps follow its first cusp counter-clockwise in 120 degree
  // steps, as do the sorted rays
  for (int k = 0; k < 3; ++k) {
    p.cusps[k] = x + (r / std::sqrt(3.0)) * rays[k].dir;
    p.boundary_chain.arcs.push_back({p.cusps[k], p.cusps[(k + 1) % 3], -1.0 / r});
    p.chambers.push_back(rays[k].ccw);
  }
  p.boundary_chain.closed = true;
  return p;
}

// ---------------------------------------------------------------------------
// Boundary triple junctions

namespace detail {

struct CornerSetup {
  Point2 x, a, b;  // corner and the two pivots, a first counter-clockwise
  int l0 = 0, n = 0, l1 = 0;
  int edge_a = 0, edge_b = 0;
};

inline CornerSetup corner_setup(const JunctionNetwork& net, int node) {
  if (node >= net.topology.jumps || net.topology.jump_degree[node] != 2)
    throw InvalidInput("wet_boundary_junction: node is not a boundary triple junction");
  auto rays = incident_rays(net, node);
  if (rays.size() != 2) throw InvalidInput("wet_boundary_junction: expected two incident segments");
  if (cross(rays[0].dir, rays[1].dir) < 0) std::swap(rays[0], rays[1]);
  for (const auto& r : rays)
    if (r.other >= net.topology.jumps || net.topology.jump_degree[r.other] != 1)
      throw InvalidInput("wet_boundary_junction: unsupported pivot (segment does not end at an ordinary jump)");
  CornerSetup s;
  s.x = net.node(node);
  s.a = net.node(rays[0].other);
  s.b = net.node(rays[1].other);
  s.n = rays[0].ccw;
  if (rays[1].cw != s.n) throw InvalidInput("wet_boundary_junction: inconsistent wedge chamber");
  s.l0 = rays[0].cw;
  s.l1 = rays[1].ccw;
  s.edge_a = rays[0].edge;
  s.edge_b = rays[1].edge;
  return s;
}

// Tangent point from p to the circle (o, r) nearest to `near`.
inline std::optional<Point2> tangent_point(Point2 p, Point2 o, double r, Point2 near) {
  const double d = distance(p, o);
  if (!(d > r)) return std::nullopt;
  const double beta = std::acos(r / d);
  const Point2 u = unit(p - o);
  const Point2 t1 = o + r * rotate(u, beta), t2 = o + r * rotate(u, -beta);
  return distance(t1, near) < distance(t2, near) ? t1 : t2;
}

struct CornerGeometry {
  Point2 o1, o2, o3, c1, c2;
};

inline std::optional<CornerGeometry> corner_from_center(const CornerSetup& s, Point2 o3, double r0, double rn,
                                                        double r1) {
  const auto c1 = tangent_point(s.a, o3, rn, s.x);
  const auto c2 = tangent_point(s.b, o3, rn, s.x);
  if (!c1 || !c2) return std::nullopt;
  CornerGeometry g;
  g.o3 = o3;
  g.c1 = *c1;
  g.c2 = *c2;
  g.o1 = *c1 + r0 * unit(*c1 - o3);
  g.o2 = *c2 + r1 * unit(*c2 - o3);
  return g;
}

}  // namespace detail

// Corner piece with arc radii scale * c_l for the chamber l across each arc.
inline WetPiece solve_corner_piece(const JunctionNetwork& net, int node, double scale, const Weights& w) {
  const auto s = detail::corner_setup(net, node);
  WetPiece p;
  p.node = node;
  p.boundary = true;
  p.corner = s.x;
  if (scale == 0.0) {
    p.cusps = {s.x, s.x};
    return p;
  }
  auto cost = [&](int l) { return w.c.empty() ? 1.0 : w.of(l); };
  const double r0 = scale * cost(s.l0), rn = scale * cost(s.n), r1 = scale * cost(s.l1);
  const Point2 da = unit(s.a - s.x), db = unit(s.b - s.x);
  const double alpha = std::acos(std::clamp(dot(da, db), -1.0, 1.0));
  Eigen::Vector2d o(0, 0);
  {
    const Point2 g = s.x + (rn / std::sin(0.5 * alpha)) * unit(da + db);
    o << g.x, g.y;
  }
  auto residual = [&](const Eigen::Vector2d& v) -> std::optional<Eigen::Vector2d> {
    const auto g = detail::corner_from_center(s, {v(0), v(1)}, r0, rn, r1);
    if (!g) return std::nullopt;
    return Eigen::Vector2d(distance(s.x, g->o1) - r0, distance(s.x, g->o2) - r1);
  };
  auto f = residual(o);
  if (!f) throw Infeasible("corner piece: no tangent from a pivot");
  const double tol = 1e-14 * (1.0 + scale);
  for (int it = 0; it < 100 && f->norm() > tol; ++it) {
    Eigen::Matrix2d jac;
    const double hstep = 1e-7 * scale;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(k) = hstep;
      const auto fp = residual(o + e), fm = residual(o - e);
      if (!fp || !fm) throw Infeasible("corner piece: Jacobian undefined");
      jac.col(k) = (*fp - *fm) / (2 * hstep);
    }
    const Eigen::Vector2d d = jac.colPivHouseholderQr().solve(-*f);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      const auto ft = residual(o + t * d);
      if (ft && ft->norm() < f->norm()) {
        o += t * d;
        f = ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (f->norm() > 1e-11 * (1.0 + scale)) throw Infeasible("corner piece: tangency system did not converge");
  const auto g = *detail::corner_from_center(s, {o(0), o(1)}, r0, rn, r1);
  p.cusps = {g.c1, g.c2};
  p.boundary_chain.closed = true;
  p.boundary_chain.arcs = {arc_about(s.x, g.c1, g.o1), arc_about(g.c1, g.c2, g.o3), arc_about(g.c2, s.x, g.o2)};
  p.chambers = {s.l0, s.n, s.l1};
  // arcs bulge into G and are tangent at the cusps
  for (const auto& a : p.boundary_chain.arcs)
    if (!(a.curvature < 0)) throw Infeasible("corner piece: an arc bends the wrong way");
  const Point2 ta = unit(g.c1 - s.a), tb = unit(g.c2 - s.b);
  const auto& arcs = p.boundary_chain.arcs;
  if (std::abs(cross(endpoint_tangent(arcs[0], false), ta)) > 1e-8 ||
      std::abs(cross(endpoint_tangent(arcs[1], true), ta)) > 1e-8 ||
      std::abs(cross(endpoint_tangent(arcs[1], false), tb)) > 1e-8 ||
      std::abs(cross(endpoint_tangent(arcs[2], true), tb)) > 1e-8)
    throw Infeasible("corner piece: cusps are not tangent");
  for (const auto& a : arcs)
    for (const auto& q : sample_arc(a, 32))
      if (norm(q) > 1.0 + 1e-12) throw Infeasible("corner piece leaves the disk");
  if (!is_simple(p.boundary_chain)) throw Infeasible("corner piece is not simple");
  p.area = chain_area(p.boundary_chain);
  return p;
}

// Corner piece whose area equals area_target, by bisection on the radius.
inline WetPiece wet_boundary_junction(const JunctionNetwork& net, int node, double area_target, const Weights& w) {
  if (!(area_target >= 0.0)) throw InvalidInput("wet_boundary_junction: area must be >= 0");
  if (area_target == 0.0) return solve_corner_piece(net, node, 0.0, w);
  double lo = 0.0, hi = std::sqrt(area_target);
  while (solve_corner_piece(net, node, hi, w).area < area_target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 10.0) throw Infeasible("wet_boundary_junction: area target too large");
  }
  WetPiece best;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    best = solve_corner_piece(net, node, mid, w);
    if (std::abs(best.area - area_target) < 1e-14 || hi - lo < 1e-16) break;
    (best.area < area_target ? lo : hi) = mid;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Calibration and assembly

namespace detail {

inline std::vector<int> boundary_triples(const JunctionNetwork& dry) {
  std::vector<int> out;
  for (int i = 0; i < dry.topology.jumps; ++i)
    if (dry.topology.jump_degree[i] == 2) out.push_back(i);
  return out;
}

}  // namespace detail

// Common radius r such that the pieces' total area is delta. With interior
// junctions only this is closed form; otherwise a bisection on r.
inline WettingParams calibrate_radius(const JunctionNetwork& dry, double delta, const Weights& w = {}) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("calibrate_radius: delta must be >= 0");
  WettingParams p;
  p.interior = dry.topology.junctions;
  const auto corners = detail::boundary_triples(dry);
  p.boundary = static_cast<int>(corners.size());
  if (p.interior + p.boundary == 0 || delta == 0.0) {
    p.nothing_to_wet = p.interior + p.boundary == 0;
    return p;
  }
  const double k = triangle_area_factor();
  if (p.boundary == 0) {
    p.r = std::sqrt(delta / (p.interior * k));
    p.third_area = delta / (3.0 * p.interior);
  } else {
    auto total = [&](double r) {
      double a = p.interior * k * r * r;
      for (int c : corners) a += solve_corner_piece(dry, c, r, w).area;
      return a;
    };
    double lo = 0.0, hi = std::sqrt(delta);
    while (total(hi) < delta) {
      lo = hi;
      hi *= 2.0;
      if (hi > 10.0) throw Infeasible("calibrate_radius: delta too large");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) < delta ? lo : hi) = mid;
    }
    p.r = 0.5 * (lo + hi);
  }
  p.kappa = 1.0 / p.r;
  p.interior_piece_area = k * p.r * p.r;
  return p;
}

// Wetted cluster from a dry network. Requires equal weights.
inline WettedCluster build_wetted(const JunctionNetwork& dry, const BoundaryTrace& h, const Weights& w,
                                  double delta) {
  if (!w.all_equal()) throw InvalidInput("build_wetted: wetting needs equal weights");
  const int chambers = w.chambers();
  WettedCluster out;
  out.base = dry;
  out.dry_energy = dry.energy;
  out.params = calibrate_radius(dry, delta, w);
  const double r = out.params.r;
  if (r == 0.0) {
    out.cluster = network_cluster(dry, h, chambers);
    out.predicted_energy = dry.energy;
    return out;
  }
  // segment endpoints after wetting, per edge end
  const auto& edges = dry.topology.edges;
  std::vector<Point2> start(edges.size()), end(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) start[k] = dry.node(edges[k].u), end[k] = dry.node(edges[k].v);
  for (int s = 0; s < dry.topology.junctions; ++s) {
    const int node = dry.topology.jumps + s;
    auto piece = wet_interior_junction(dry, node, r);
    const Point2 x = dry.node(node);
    for (const auto& ray : detail::incident_rays(dry, node)) {
      const Point2 cusp = x + (r / std::sqrt(3.0)) * ray.dir;
      (edges[ray.edge].u == node ? start : end)[ray.edge] = cusp;
      if (norm(cusp) >= 1.0) throw Infeasible("wet piece leaves the disk");
    }
    out.pieces.push_back(std::move(piece));
  }
  for (int node : detail::boundary_triples(dry)) {
    auto piece = solve_corner_piece(dry, node, r, w);
    const auto s = detail::corner_setup(dry, node);
    (edges[s.edge_a].u == node ? start : end)[s.edge_a] = piece.cusps[0];
    (edges[s.edge_b].u == node ? start : end)[s.edge_b] = piece.cusps[1];
    out.pieces.push_back(std::move(piece));
  }
  // pieces must stay apart
  for (std::size_t a = 0; a < out.pieces.size(); ++a)
    for (std::size_t b = a + 1; b < out.pieces.size(); ++b)
      for (const auto& pa : out.pieces[a].cusps)
        for (const auto& pb : out.pieces[b].cusps)
          if (distance(pa, pb) < 1e-9) throw Infeasible("wet pieces collide");

  ArcCluster& c = out.cluster;
  c.domain = Domain::ball;
  c.chambers = chambers;
  c.interfaces = boundary_interfaces(h);
  std::vector<int> edge_interface(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Interface f;
    f.chain.arcs = {{start[k], end[k], 0.0}};
    f.left = edges[k].left;
    f.right = edges[k].right;
    edge_interface[k] = static_cast<int>(c.interfaces.size());
    c.interfaces.push_back(std::move(f));
  }
  for (int i = 0; i < dry.topology.jumps; ++i) {
    if (dry.topology.jump_degree[i] != 1) continue;
    std::vector<int> inc;
    for (std::size_t k = 0; k < edges.size(); ++k)
      if (edges[k].u == i || edges[k].v == i) inc.push_back(edge_interface[k]);
    c.junctions.push_back({dry.node(i), JunctionKind::boundary_jump, inc});
  }
  for (const auto& p : out.pieces) {
    std::vector<int> arc_ids;
    for (std::size_t k = 0; k < p.boundary_chain.arcs.size(); ++k) {
      Interface f;
      f.chain.arcs = {p.boundary_chain.arcs[k]};
      f.left = kWet;
      f.right = p.chambers[k];
      arc_ids.push_back(static_cast<int>(c.interfaces.size()));
      c.interfaces.push_back(std::move(f));
    }
    const std::size_t m = p.boundary_chain.arcs.size();
    // cusp k of an interior piece starts arc k; a corner piece's cusps start arcs 1 and 2
    for (std::size_t k = 0; k < p.cusps.size(); ++k) {
      const std::size_t next = p.boundary ? k + 1 : k;
      const std::size_t prev = (next + m - 1) % m;
      std::vector<int> inc{arc_ids[prev], arc_ids[next]};
      for (std::size_t e = 0; e < edges.size(); ++e)
        if (distance(start[e], p.cusps[k]) < 1e-12 || distance(end[e], p.cusps[k]) < 1e-12)
          inc.push_back(edge_interface[e]);
      c.junctions.push_back({p.cusps[k], JunctionKind::interior_cusp, inc});
    }
    if (p.corner) c.junctions.push_back({*p.corner, JunctionKind::boundary_corner, {arc_ids.front(), arc_ids.back()}});
  }
  // predicted energy: closed form per interior junction, exact geometry per corner
  out.predicted_energy = dry.energy + dry.topology.junctions * interior_energy_change(r);
  for (const auto& p : out.pieces) {
    if (!p.boundary) continue;
    const auto s = detail::corner_setup(dry, p.node);
    double delta_e = 0.0;
    for (std::size_t k = 0; k < 3; ++k) delta_e += arc_length(p.boundary_chain.arcs[k]) * w.pair(kWet, p.chambers[k]);
    delta_e += w.pair(s.l0, s.n) * (distance(s.a, p.cusps[0]) - distance(s.a, s.x));
    delta_e += w.pair(s.l1, s.n) * (distance(s.b, p.cusps[1]) - distance(s.b, s.x));
    out.predicted_energy += delta_e;
  }
  return out;
}

}  // namespace wetcluster
