#pragma once

// SVG renderings: chambers as flat fills, G hatched, junctions and cusps as
// dots. Path data keeps full precision so tangencies can be inspected.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "wetcluster/lattice.hpp"
#include "wetcluster/model.hpp"

namespace wetcluster {

namespace detail {

inline std::string chamber_color(int l) {
  static const char* palette[] = {"#8fb3d9", "#e6a67a", "#9fcf8f", "#d79fc8", "#e3d27a", "#7fcbc4", "#c2a98a", "#b0b0e0"};
  if (l <= 0) return "#ffffff";
  return palette[(l - 1) % 8];
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Arc as an SVG path command from the current point; y is flipped by the
// enclosing group so the sweep flag follows the sign of the curvature.
inline std::string arc_command(const CircArc& a) {
  if (std::abs(a.curvature) < 1e-12) return "L" + num(a.end.x) + " " + num(a.end.y);
  const double r = 1.0 / std::abs(a.curvature);
  const int large = subtended_angle(a) > std::numbers::pi ? 1 : 0;
  const int sweep = a.curvature > 0 ? 1 : 0;
  return "A" + num(r) + " " + num(r) + " 0 " + std::to_string(large) + " " + std::to_string(sweep) + " " +
         num(a.end.x) + " " + num(a.end.y);
}

inline std::string chain_path(const ArcChain& c) {
  if (c.arcs.empty()) return "";
  std::string d = "M" + num(c.arcs.front().start.x) + " " + num(c.arcs.front().start.y);
  for (const auto& a : c.arcs) d += " " + arc_command(a);
  if (c.closed) d += " Z";
  return d;
}

inline std::string svg_header(double lo, double size, int px) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px << "\" viewBox=\"" << num(lo)
     << " " << num(lo) << " " << num(size) << " " << num(size) << "\">\n"
     << "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"0.02\" height=\"0.02\" "
        "patternTransform=\"rotate(45)\"><rect width=\"0.02\" height=\"0.02\" fill=\"#f4f4f4\"/>"
        "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"0.02\" stroke=\"#333\" stroke-width=\"0.006\"/></pattern></defs>\n"
     << "<g transform=\"scale(1,-1)\">\n";
  return os.str();
}

}  // namespace detail

inline std::string render_svg(const ArcCluster& c, int px = 800) {
  using detail::num;
  const double lo = c.domain == Domain::ball ? -1.05 : -1.15;
  std::ostringstream os;
  os << detail::svg_header(lo, -2 * lo, px);
  for (int l = 1; l <= c.chambers; ++l) {
    std::string d;
    try {
      for (const auto& cyc : region_cycles(c, l)) d += detail::chain_path(cyc) + " ";
    } catch (const InvalidInput&) {
      continue;  // open boundaries are still drawn as strokes below
    }
    if (!d.empty())
      os << "<path d=\"" << d << "\" fill=\"" << detail::chamber_color(l) << "\" fill-rule=\"evenodd\" stroke=\"none\"/>\n";
  }
  try {
    std::string d;
    for (const auto& cyc : region_cycles(c, kWet)) d += detail::chain_path(cyc) + " ";
    if (!d.empty()) os << "<path d=\"" << d << "\" fill=\"url(#hatch)\" stroke=\"none\"/>\n";
  } catch (const InvalidInput&) {
  }
  for (const auto& f : c.interfaces) {
    const bool outer = f.left == kExterior || f.right == kExterior;
    const bool wet = f.left == kWet || f.right == kWet;
    os << "<path d=\"" << detail::chain_path(f.chain) << "\" fill=\"none\" stroke=\"" << (wet ? "#b22222" : "#111")
       << "\" stroke-width=\"" << (outer ? "0.006" : "0.004") << "\"/>\n";
  }
  for (const auto& j : c.junctions) {
    const bool cusp = j.kind == JunctionKind::interior_cusp || j.kind == JunctionKind::boundary_corner;
    os << "<circle cx=\"" << num(j.at.x) << "\" cy=\"" << num(j.at.y) << "\" r=\"" << (cusp ? "0.008" : "0.012")
       << "\" fill=\"" << (cusp ? "#b22222" : "#111") << "\"><title>" << junction_kind_name(j.kind) << "</title></circle>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

// Label field as row runs of rectangles.
inline std::string render_svg(const LabelField& f, int px = 800) {
  using detail::num;
  const double lo = f.domain == Domain::ball ? -1.05 : -1.15;
  std::ostringstream os;
  os << detail::svg_header(lo, -2 * lo, px);
  for (int j = 0; j < f.ny; ++j) {
    int i = 0;
    while (i < f.nx) {
      const std::size_t k = f.index(i, j);
      int e = i + 1;
      while (e < f.nx && f.inside[f.index(e, j)] == f.inside[k] && f.at(e, j) == f.at(i, j)) ++e;
      if (f.inside[k]) {
        const std::uint8_t l = f.labels[k];
        const std::string fill = l == kWetCell ? "url(#hatch)" : detail::chamber_color(l);
        const Point2 p = f.origin + Point2{i * f.cell, j * f.cell};
        os << "<rect x=\"" << num(p.x) << "\" y=\"" << num(p.y) << "\" width=\"" << num((e - i) * f.cell)
           << "\" height=\"" << num(f.cell) << "\" fill=\"" << fill << "\" shape-rendering=\"crispEdges\"/>\n";
      }
      i = e;
    }
  }
  if (f.domain == Domain::ball)
    os << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#111\" stroke-width=\"0.006\"/>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace wetcluster
