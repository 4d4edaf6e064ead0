#pragma once

// Measurements on label fields: rasterized cluster comparison, Hausdorff
// distances, interface extraction with circle fits, cusp and convexity
// probes, and the monotonicity-profile diagnostic.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "wetcluster/lattice.hpp"

namespace wetcluster {

// ---------------------------------------------------------------------------
// Rasterized clusters

// Labels of `like`'s domain cells taken from the cluster region containing
// each cell center (scanline fill over the polygonized region boundaries).
inline LabelField rasterize_cluster(const ArcCluster& c, const LabelField& like) {
  LabelField f = like;
  constexpr std::uint8_t kUnset = 254;
  for (std::size_t k = 0; k < f.size(); ++k) f.labels[k] = f.inside[k] ? kUnset : 0;
  std::vector<int> regions;
  for (int r = 1; r <= c.chambers; ++r) regions.push_back(r);
  regions.push_back(kWet);
  if (c.domain == Domain::plane) regions.push_back(0);
  for (int region : regions) {
    std::vector<std::pair<Point2, Point2>> edges;
    for (const auto& face : c.interfaces) {
      if (face.left != region && face.right != region) continue;
      if (face.left == face.right) continue;
      for (const auto& a : face.chain.arcs) {
        const auto pts = polygonize(a, 0.25 * f.cell);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) edges.push_back({pts[i], pts[i + 1]});
      }
    }
    if (edges.empty()) continue;
    std::vector<double> xs;
    for (int j = 0; j < f.ny; ++j) {
      const double y = f.center(0, j).y;
      xs.clear();
      for (const auto& [u, v] : edges)
        if ((u.y > y) != (v.y > y)) xs.push_back(u.x + (y - u.y) * (v.x - u.x) / (v.y - u.y));
      std::sort(xs.begin(), xs.end());
      for (std::size_t p = 0; p + 1 < xs.size(); p += 2) {
        const int i0 = std::max(0, static_cast<int>(std::ceil((xs[p] - f.origin.x) / f.cell - 0.5)));
        const int i1 = std::min(f.nx - 1, static_cast<int>(std::floor((xs[p + 1] - f.origin.x) / f.cell - 0.5)));
        for (int i = i0; i <= i1; ++i) {
          const std::size_t k = f.index(i, j);
          if (f.inside[k] && f.labels[k] == kUnset) f.labels[k] = cell_label(region);
        }
      }
    }
  }
  // cells exactly on a boundary take a labeled neighbor's label
  for (int pass = 0; pass < 4; ++pass)
    for (int j = 1; j + 1 < f.ny; ++j)
      for (int i = 1; i + 1 < f.nx; ++i) {
        const std::size_t k = f.index(i, j);
        if (f.labels[k] != kUnset) continue;
        for (std::size_t q : {k - 1, k + 1, k - f.nx, k + f.nx})
          if (f.inside[q] && f.labels[q] != kUnset) {
            f.labels[k] = f.labels[q];
            break;
          }
      }
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.labels[k] == kUnset) throw InvalidInput("rasterize_cluster: cluster does not cover the domain");
  return f;
}

// ---------------------------------------------------------------------------
// Distances

// Squared Euclidean distance (in cells) from every cell to the nearest set
// cell; infinity when the set is empty.
inline std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& set, int nx, int ny) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) d[k] = set[k] ? 0.0 : inf;
  // one-dimensional lower envelope of parabolas
  auto pass = [](std::vector<double>& f, int n) {
    std::vector<double> out(n), z(n + 1);
    std::vector<int> v(n);
    int k = -1;
    for (int q = 0; q < n; ++q) {
      if (f[q] == inf) continue;
      if (k < 0) {
        v[0] = q;
        z[0] = -inf;
        z[1] = inf;
        k = 0;
        continue;
      }
      double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
      while (s <= z[k]) {
        --k;
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
    }
    if (k < 0) return;
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (z[j + 1] < q) ++j;
      out[q] = (q - v[j]) * (q - v[j]) + f[v[j]];
    }
    f = out;
  };
  std::vector<double> line;
  for (int i = 0; i < nx; ++i) {
    line.assign(ny, inf);
    for (int j = 0; j < ny; ++j) line[j] = d[static_cast<std::size_t>(j) * nx + i];
    pass(line, ny);
    for (int j = 0; j < ny; ++j) d[static_cast<std::size_t>(j) * nx + i] = line[j];
  }
  for (int j = 0; j < ny; ++j) {
    line.assign(d.begin() + static_cast<std::ptrdiff_t>(j) * nx, d.begin() + static_cast<std::ptrdiff_t>(j + 1) * nx);
    pass(line, nx);
    std::copy(line.begin(), line.end(), d.begin() + static_cast<std::ptrdiff_t>(j) * nx);
  }
  return d;
}

struct HausdorffResult {
  double distance = 0.0;  // length units
  bool infinite = false;  // region empty in exactly one input
};

namespace detail {

inline std::vector<std::uint8_t> region_mask(const LabelField& f, int region) {
  const std::uint8_t l = cell_label(region);
  std::vector<std::uint8_t> m(f.size(), 0);
  for (std::size_t k = 0; k < f.size(); ++k) m[k] = f.inside[k] && f.labels[k] == l;
  return m;
}

inline void check_same_grid(const LabelField& a, const LabelField& b) {
  if (a.nx != b.nx || a.ny != b.ny || a.cell != b.cell || a.origin != b.origin)
    throw InvalidInput("fields live on different grids");
}

}  // namespace detail

// Symmetric Hausdorff distance between the cell-center supports of a region.
inline HausdorffResult hausdorff(const LabelField& a, const LabelField& b, int region) {
  detail::check_same_grid(a, b);
  const auto ma = detail::region_mask(a, region), mb = detail::region_mask(b, region);
  const bool ea = std::none_of(ma.begin(), ma.end(), [](auto v) { return v != 0; });
  const bool eb = std::none_of(mb.begin(), mb.end(), [](auto v) { return v != 0; });
  if (ea && eb) return {};
  if (ea || eb) return {std::numeric_limits<double>::infinity(), true};
  const auto da = squared_distance_transform(ma, a.nx, a.ny), db = squared_distance_transform(mb, b.nx, b.ny);
  double s = 0.0;
  for (std::size_t k = 0; k < ma.size(); ++k) {
    if (ma[k]) s = std::max(s, db[k]);
    if (mb[k]) s = std::max(s, da[k]);
  }
  return {std::sqrt(s) * a.cell, false};
}

inline HausdorffResult hausdorff(const LabelField& f, const ArcCluster& c, int region) {
  return hausdorff(f, rasterize_cluster(c, f), region);
}

// Largest distance from a G cell center to the point set (the singular set of
// the dry minimizer); 0 when G is empty.
inline double wet_to_points_distance(const LabelField& f, const std::vector<Point2>& points) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k] || f.labels[k] != kWetCell) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) best = std::min(best, distance(f.center(k), p));
    s = std::max(s, best);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Interfaces and circle fits

// Sub-cell points of the interface between regions a and b: the 0.5 level of
// the smoothed indicator of a along cell-center edges, kept only where the
// surrounding 5x5 block holds both labels and nothing else.
inline std::vector<Point2> interface_points(const LabelField& f, int a, int b, Point2 center, double radius) {
  const std::uint8_t la = cell_label(a), lb = cell_label(b);
  std::vector<double> phi(f.size(), 0.0), tmp(f.size(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) phi[k] = f.labels[k] == la ? 1.0 : 0.0;
  for (int rep = 0; rep < 2; ++rep) {
    for (int j = 1; j + 1 < f.ny; ++j)
      for (int i = 1; i + 1 < f.nx; ++i) {
        double s = 0.0;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) s += phi[f.index(i + di, j + dj)];
        tmp[f.index(i, j)] = s / 9.0;
      }
    phi.swap(tmp);
  }
  auto clean = [&](int i, int j) {
    bool has_a = false, has_b = false;
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di) {
        if (!f.in_grid(i + di, j + dj)) return false;
        const std::size_t q = f.index(i + di, j + dj);
        if (!f.inside[q]) return false;
        const std::uint8_t l = f.labels[q];
        if (l == la) has_a = true;
        else if (l == lb) has_b = true;
        else return false;
      }
    return has_a && has_b;
  };
  std::vector<Point2> pts;
  for (int j = 2; j + 3 < f.ny; ++j)
    for (int i = 2; i + 3 < f.nx; ++i) {
      const double p0 = phi[f.index(i, j)];
      for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
        const double p1 = phi[f.index(i + di, j + dj)];
        if ((p0 - 0.5) * (p1 - 0.5) >= 0.0 || p0 == p1) continue;
        const double t = (0.5 - p0) / (p1 - p0);
        const Point2 q = f.center(i, j) + t * f.cell * Point2{static_cast<double>(di), static_cast<double>(dj)};
        if (distance(q, center) > radius) continue;
        if (!clean(t < 0.5 ? i : i + di, t < 0.5 ? j : j + dj)) continue;
        pts.push_back(q);
      }
    }
  return pts;
}

struct CircleFit {
  Point2 center;
  double radius = 0.0;
  double rms = 0.0;  // geometric residual
  std::size_t points = 0;
};

// Algebraic (Kasa) fit refined by Gauss-Newton on geometric distances.
inline CircleFit fit_circle(const std::vector<Point2>& pts) {
  if (pts.size() < 8) throw InvalidInput("circle fit needs at least 8 points");
  Point2 mean{};
  for (const auto& p : pts) mean = mean + p;
  mean = mean / static_cast<double>(pts.size());
  const std::size_t n = pts.size();
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point2 p = pts[k] - mean;
    a(k, 0) = p.x;
    a(k, 1) = p.y;
    a(k, 2) = 1.0;
    rhs(k) = p.x * p.x + p.y * p.y;
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(rhs);
  Eigen::Vector3d x(0.5 * s(0), 0.5 * s(1), 0.0);
  x(2) = std::sqrt(std::max(s(2) + x(0) * x(0) + x(1) * x(1), 0.0));
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd j(n, 3);
    Eigen::VectorXd r(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Point2 p = pts[k] - mean;
      const double dx = p.x - x(0), dy = p.y - x(1), d = std::hypot(dx, dy);
      r(k) = d - x(2);
      j(k, 0) = -dx / d;
      j(k, 1) = -dy / d;
      j(k, 2) = -1.0;
    }
    const Eigen::Vector3d step = j.colPivHouseholderQr().solve(-r);
    x += step;
    if (step.norm() < 1e-14 * (1.0 + x(2))) break;
  }
  CircleFit fit;
  fit.center = mean + Point2{x(0), x(1)};
  fit.radius = std::abs(x(2));
  fit.points = n;
  double ss = 0.0;
  for (const auto& p : pts) ss += std::pow(distance(p, fit.center) - fit.radius, 2);
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

struct CurvatureFit {
  double curvature = 0.0;  // positive when region a is on the circle's center side
  double rms = 0.0;
  std::size_t points = 0;
  CircleFit circle;
};

inline CurvatureFit measure_curvature(const LabelField& f, int a, int b, Point2 center, double radius) {
  const auto pts = interface_points(f, a, b, center, radius);
  const auto c = fit_circle(pts);
  // the point set's centroid side decides the sign
  Point2 mid{};
  for (const auto& p : pts) mid = mid + p;
  mid = mid / static_cast<double>(pts.size());
  const Point2 foot = c.center + c.radius * unit(mid - c.center);
  const Point2 probe = foot + 3.0 * f.cell * unit(c.center - foot);
  const int i = static_cast<int>(std::floor((probe.x - f.origin.x) / f.cell));
  const int j = static_cast<int>(std::floor((probe.y - f.origin.y) / f.cell));
  const bool a_inside = f.in_grid(i, j) && f.at(i, j) == cell_label(a);
  return {(a_inside ? 1.0 : -1.0) / c.radius, c.rms, c.points, c};
}

// ---------------------------------------------------------------------------
// Cusps and convexity

namespace detail {

// 8-connected components of the cells selected by `take`.
template <class Pred>
std::vector<std::vector<std::size_t>> components(const LabelField& f, Pred take, int link = 1) {
  std::vector<int> comp(f.size(), -1);
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (comp[s] >= 0 || !take(s)) continue;
    out.emplace_back();
    comp[s] = static_cast<int>(out.size()) - 1;
    stack = {s};
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      out.back().push_back(k);
      const int i = static_cast<int>(k % f.nx), j = static_cast<int>(k / f.nx);
      for (int dj = -link; dj <= link; ++dj)
        for (int di = -link; di <= link; ++di) {
          if (!f.in_grid(i + di, j + dj)) continue;
          const std::size_t q = f.index(i + di, j + dj);
          if (comp[q] < 0 && take(q)) {
            comp[q] = comp[s];
            stack.push_back(q);
          }
        }
    }
  }
  return out;
}

}  // namespace detail

struct CuspReport {
  std::size_t count = 0;
  std::vector<Point2> points;  // cluster centroids
};

// Places where a dry interface ends on G: chamber cells touching both G and a
// different chamber, clustered within 3 cells. Cells near the frozen ring are
// ignored (boundary corners are not cusps).
inline CuspReport find_cusps(const LabelField& f) {
  auto triple = [&](std::size_t k) {
    if (!f.inside[k] || f.labels[k] == kWetCell) return false;
    if (f.domain == Domain::ball && norm(f.center(k)) > 1.0 - 4.0 * f.cell) return false;
    bool wet = false, other = false;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const std::size_t q = k + static_cast<std::ptrdiff_t>(dj) * f.nx + di;
        if (!f.inside[q]) continue;
        if (f.labels[q] == kWetCell) wet = true;
        else if (f.labels[q] != f.labels[k]) other = true;
      }
    return wet && other;
  };
  CuspReport r;
  for (const auto& comp : detail::components(f, triple, 3)) {
    Point2 c{};
    for (auto k : comp) c = c + f.center(k);
    r.points.push_back(c / static_cast<double>(comp.size()));
  }
  r.count = r.points.size();
  return r;
}

struct ConvexityReport {
  std::size_t components = 0;
  std::size_t worst_excess = 0;  // cells
  std::size_t total_excess = 0;
};

// Per connected component of a chamber: cells whose centers lie in the convex
// hull of the component's cell centers but carry another label.
inline ConvexityReport convexity_excess(const LabelField& f, int region) {
  const std::uint8_t l = cell_label(region);
  ConvexityReport rep;
  const auto comps = detail::components(f, [&](std::size_t k) { return f.inside[k] && f.labels[k] == l; });
  for (const auto& comp : comps) {
    // row extremes suffice for the hull
    std::map<int, std::pair<int, int>> rows;
    for (auto k : comp) {
      const int i = static_cast<int>(k % f.nx), j = static_cast<int>(k / f.nx);
      auto it = rows.find(j);
      if (it == rows.end()) rows[j] = {i, i};
      else it->second = {std::min(it->second.first, i), std::max(it->second.second, i)};
    }
    std::vector<std::pair<long, long>> pts;
    for (const auto& [j, ext] : rows) {
      pts.push_back({ext.first, j});
      if (ext.second != ext.first) pts.push_back({ext.second, j});
    }
    std::sort(pts.begin(), pts.end());
    auto turn = [](std::pair<long, long> o, std::pair<long, long> a, std::pair<long, long> b) {
      return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<long, long>> hull(2 * pts.size());
    std::size_t h = 0;
    for (const auto& p : pts) {
      while (h >= 2 && turn(hull[h - 2], hull[h - 1], p) <= 0) --h;
      hull[h++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = h + 1; i-- > 0;) {
      while (h >= t && turn(hull[h - 2], hull[h - 1], pts[i]) <= 0) --h;
      hull[h++] = pts[i];
    }
    hull.resize(h > 1 ? h - 1 : h);
    std::size_t excess = 0;
    if (hull.size() >= 3) {
      const long lo = pts.front().first, hi = pts.back().first;
      for (const auto& [j, ext] : rows) {
        (void)ext;
        for (long i = lo; i <= hi; ++i) {
          bool in = true;
          for (std::size_t e = 0; e < hull.size() && in; ++e)
            in = turn(hull[e], hull[(e + 1) % hull.size()], {i, j}) >= 0;
          if (in && f.labels[f.index(static_cast<int>(i), j)] != l) ++excess;
        }
      }
    }
    ++rep.components;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    rep.total_excess += excess;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Monotonicity profile

struct MonotonicityReport {
  double lambda_hat = 0.0;  // smallest constant making every sampled profile non-decreasing
  std::vector<Point2> centers;
  std::vector<double> radii;
  std::vector<std::vector<double>> profiles;  // energy(B_r(x)) / r per center
};

// Lattice energy inside B_r(x); pairs are weighted by the covered fraction of
// a one-cell band around the sphere so that the profile is smooth in r.
inline double ball_energy(const LabelField& f, const Weights& w, Point2 x, double r, int stencil = 16) {
  const auto offs = detail::half_offsets(f, stencil);
  const auto cost = detail::pair_costs(w);
  const int i0 = std::max(0, static_cast<int>(std::floor((x.x - r - f.origin.x) / f.cell)) - 3);
  const int i1 = std::min(f.nx - 1, static_cast<int>(std::ceil((x.x + r - f.origin.x) / f.cell)) + 3);
  const int j0 = std::max(0, static_cast<int>(std::floor((x.y - r - f.origin.y) / f.cell)) - 3);
  const int j1 = std::min(f.ny - 1, static_cast<int>(std::ceil((x.y + r - f.origin.y) / f.cell)) + 3);
  double s = 0.0;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const std::size_t k = f.index(i, j);
      if (!f.inside[k]) continue;
      for (const auto& o : offs) {
        const std::size_t q = k + o.dk;
        if (!f.inside[q] || f.labels[q] == f.labels[k]) continue;
        const Point2 mid = 0.5 * (f.center(k) + f.center(q));
        const double cover = std::clamp((r - distance(mid, x)) / f.cell + 0.5, 0.0, 1.0);
        s += cover * o.weight * cost[f.labels[k] * 256 + f.labels[q]];
      }
    }
  return s;
}

// Profiles r -> energy(B_r(x)) / r at `samples` interface cells at least
// `clearance` from the domain boundary, over log-spaced radii in
// [min_cells * cell, r_max]; lambda_hat is the least L with
// profile(r_i) + L r_i non-decreasing for all of them.
inline MonotonicityReport monotonicity_profile(const LabelField& f, const Weights& w, int samples = 20,
                                               double min_cells = 4.0, double r_max = 0.3, int radii = 16,
                                               double clearance = 0.35, int stencil = 16) {
  MonotonicityReport rep;
  std::vector<std::size_t> cand;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k] || f.frozen[k]) continue;
    const Point2 c = f.center(k);
    if (f.domain == Domain::ball && norm(c) > 1.0 - clearance) continue;
    bool iface = false;
    for (std::ptrdiff_t dk : {std::ptrdiff_t{1}, std::ptrdiff_t{-1}, std::ptrdiff_t{f.nx}, -std::ptrdiff_t{f.nx}}) {
      const std::size_t q = k + dk;
      if (f.inside[q] && f.labels[q] != f.labels[k]) iface = true;
    }
    if (iface) cand.push_back(k);
  }
  if (cand.empty()) throw InvalidInput("monotonicity_profile: no interface cells away from the boundary");
  const std::size_t n = std::min<std::size_t>(samples, cand.size());
  for (std::size_t s = 0; s < n; ++s) rep.centers.push_back(f.center(cand[(2 * s + 1) * cand.size() / (2 * n)]));
  const double r0 = min_cells * f.cell;
  for (int i = 0; i < radii; ++i) rep.radii.push_back(r0 * std::pow(r_max / r0, static_cast<double>(i) / (radii - 1)));
  for (const auto& x : rep.centers) {
    std::vector<double> prof;
    for (double r : rep.radii) prof.push_back(ball_energy(f, w, x, r, stencil) / r);
    for (std::size_t i = 0; i + 1 < prof.size(); ++i)
      rep.lambda_hat = std::max(rep.lambda_hat, (prof[i] - prof[i + 1]) / (rep.radii[i + 1] - rep.radii[i]));
    rep.profiles.push_back(std::move(prof));
  }
  return rep;
}

}  // namespace wetcluster
