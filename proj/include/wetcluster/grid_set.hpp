#pragma once

// Raster sets on a square grid and the discrete versions of the slicing,
// convex clipping and hypograph rearrangement arguments.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wetcluster/crofton.hpp"
#include "wetcluster/geometry.hpp"

namespace wetcluster {

struct GridSet {
  Point2 origin;  // lower-left corner of cell (0, 0)
  double cell = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> mask;  // row-major, mask[j * nx + i]

  GridSet() = default;
  GridSet(Point2 o, double h, int w, int hgt)
      : origin(o), cell(h), nx(w), ny(hgt), mask(static_cast<std::size_t>(w) * hgt, 0) {
    if (!(h > 0.0) || w < 1 || hgt < 1) throw InvalidInput("GridSet needs positive cell and dims >= 1");
  }

  bool in_grid(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  bool at(int i, int j) const { return in_grid(i, j) && mask[static_cast<std::size_t>(j) * nx + i] != 0; }
  void set(int i, int j, bool v) { mask[static_cast<std::size_t>(j) * nx + i] = v ? 1 : 0; }
  Point2 center(int i, int j) const { return origin + Point2{(i + 0.5) * cell, (j + 0.5) * cell}; }

  friend bool operator==(const GridSet&, const GridSet&) = default;
};

inline std::size_t cell_count(const GridSet& g) {
  std::size_t n = 0;
  for (auto v : g.mask) n += v != 0;
  return n;
}

inline double grid_area(const GridSet& g) { return static_cast<double>(cell_count(g)) * g.cell * g.cell; }

// Cells whose centers satisfy the predicate.
inline GridSet rasterize(Point2 origin, double cell, int nx, int ny,
                         const std::function<bool(Point2)>& inside) {
  GridSet g(origin, cell, nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) g.set(i, j, inside(g.center(i, j)));
  return g;
}

// Half-open cell-index rectangle [i0, i1) x [j0, j1).
struct CellWindow {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;
  bool contains(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
};

inline CellWindow full_window(const GridSet& g) { return {0, 0, g.nx, g.ny}; }

// Crofton perimeter counting only pairs with both cells inside the window.
inline double crofton_relative_perimeter(const GridSet& g, const CellWindow& w, int stencil = 16) {
  double total = 0.0;
  for (const auto& d : crofton_stencil(stencil)) {
    std::size_t cuts = 0;
    for (int j = w.j0; j < w.j1; ++j)
      for (int i = w.i0; i < w.i1; ++i) {
        const int i2 = i + d.dx, j2 = j + d.dy;
        if (!w.contains(i2, j2)) continue;
        cuts += g.at(i, j) != g.at(i2, j2);
      }
    total += d.weight * static_cast<double>(cuts);
  }
  return total * g.cell;
}

// Crofton perimeter of the set in the whole plane (cells off the grid empty).
inline double crofton_perimeter(const GridSet& g, int stencil = 16) {
  const int reach = stencil_reach(stencil);
  double total = 0.0;
  for (const auto& d : crofton_stencil(stencil)) {
    std::size_t cuts = 0;
    for (int j = -reach; j < g.ny + reach; ++j)
      for (int i = -reach; i < g.nx + reach; ++i) cuts += g.at(i, j) != g.at(i + d.dx, j + d.dy);
    total += d.weight * static_cast<double>(cuts);
  }
  return total * g.cell;
}

// ---------------------------------------------------------------------------
// Hypograph rearrangement

namespace detail {

inline bool column_is_bottom_interval(const GridSet& g, int i, int j0, int j1) {
  bool seen_empty = false;
  for (int j = j0; j < j1; ++j) {
    if (!g.at(i, j)) seen_empty = true;
    else if (seen_empty) return false;
  }
  return true;
}

}  // namespace detail

// Replaces every column of the window by a bottom-anchored run with the same
// cell count. Requires, inside the window, a full bottom band and an empty
// top band at least as thick as the stencil reach, and side columns that are
// already bottom-anchored runs (the discrete form of prescribed side traces).
inline GridSet hypograph_symmetrize(const GridSet& e, const CellWindow& w, int stencil = 16) {
  if (w.i0 < 0 || w.j0 < 0 || w.i1 > e.nx || w.j1 > e.ny || w.i1 <= w.i0 || w.j1 <= w.j0)
    throw InvalidInput("hypograph_symmetrize: window outside grid");
  const int band = stencil_reach(stencil);
  if (w.j1 - w.j0 < 2 * band + 1) throw InvalidInput("hypograph_symmetrize: window too short");
  for (int i = w.i0; i < w.i1; ++i) {
    for (int b = 0; b < band; ++b) {
      if (!e.at(i, w.j0 + b))
        throw InvalidInput("hypograph_symmetrize: bottom band not full at column " + std::to_string(i) +
                           ", row " + std::to_string(w.j0 + b));
      if (e.at(i, w.j1 - 1 - b))
        throw InvalidInput("hypograph_symmetrize: top band not empty at column " + std::to_string(i) +
                           ", row " + std::to_string(w.j1 - 1 - b));
    }
  }
  for (int i : {w.i0, w.i1 - 1})
    if (!detail::column_is_bottom_interval(e, i, w.j0, w.j1))
      throw InvalidInput("hypograph_symmetrize: side column " + std::to_string(i) +
                         " is not a bottom-anchored run");
  GridSet out = e;
  for (int i = w.i0; i < w.i1; ++i) {
    int count = 0;
    for (int j = w.j0; j < w.j1; ++j) count += e.at(i, j);
    for (int j = w.j0; j < w.j1; ++j) out.set(i, j, j - w.j0 < count);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slices

enum class SliceAxis { vertical, horizontal };  // vertical: the line x = t

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct SliceTraces {
  int index = 0;  // column (vertical) or row (horizontal) containing t
  std::vector<Interval> slice;
  std::vector<Interval> minus;  // neighbor line on the low side; empty off-grid
  std::vector<Interval> plus;   // neighbor line on the high side
  bool has_minus = false;
  bool has_plus = false;
  bool traces_agree() const { return minus == plus; }
};

namespace detail {

inline std::vector<Interval> line_intervals(const GridSet& g, SliceAxis axis, int k) {
  std::vector<Interval> out;
  const int n = axis == SliceAxis::vertical ? g.ny : g.nx;
  const double base = axis == SliceAxis::vertical ? g.origin.y : g.origin.x;
  int run_start = -1;
  for (int m = 0; m <= n; ++m) {
    const bool v = m < n && (axis == SliceAxis::vertical ? g.at(k, m) : g.at(m, k));
    if (v && run_start < 0) run_start = m;
    if (!v && run_start >= 0) {
      out.push_back({base + run_start * g.cell, base + m * g.cell});
      run_start = -1;
    }
  }
  return out;
}

}  // namespace detail

// One-dimensional slice at coordinate t, with the adjacent lines standing in
// for the one-sided traces E_t^- and E_t^+.
inline SliceTraces slice_traces(const GridSet& g, double t, SliceAxis axis) {
  const double base = axis == SliceAxis::vertical ? g.origin.x : g.origin.y;
  const int n = axis == SliceAxis::vertical ? g.nx : g.ny;
  const double lo = base, hi = base + n * g.cell;
  if (!(t >= lo && t <= hi)) throw InvalidInput("slice_traces: t outside grid extent");
  SliceTraces s;
  s.index = std::min(n - 1, static_cast<int>(std::floor((t - lo) / g.cell)));
  s.slice = detail::line_intervals(g, axis, s.index);
  if (s.index > 0) {
    s.has_minus = true;
    s.minus = detail::line_intervals(g, axis, s.index - 1);
  }
  if (s.index + 1 < n) {
    s.has_plus = true;
    s.plus = detail::line_intervals(g, axis, s.index + 1);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Convex clipping of raster sets

struct GridClipReport {
  GridSet clipped;
  double perimeter_in = 0.0;
  double perimeter_out = 0.0;
  std::size_t cells_removed = 0;
  bool strict = false;
};

inline GridClipReport convex_clip(const GridSet& e, const Polygon& k_in, int stencil = 16) {
  if (!is_convex(k_in)) throw InvalidInput("convex_clip: clip region is not convex");
  const Polygon k = counter_clockwise(k_in);
  GridClipReport r;
  r.clipped = e;
  for (int j = 0; j < e.ny; ++j)
    for (int i = 0; i < e.nx; ++i)
      if (e.at(i, j) && !point_in_polygon(k, e.center(i, j))) {
        r.clipped.set(i, j, false);
        ++r.cells_removed;
      }
  r.perimeter_in = crofton_perimeter(e, stencil);
  r.perimeter_out = crofton_perimeter(r.clipped, stencil);
  r.strict = r.perimeter_out < r.perimeter_in - 1e-12 * std::max(1.0, r.perimeter_in);
  return r;
}

}  // namespace wetcluster
