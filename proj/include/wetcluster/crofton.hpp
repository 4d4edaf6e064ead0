#pragma once

// Cauchy-Crofton neighborhood stencils. A boundary of length L crossed by
// the grid is estimated as the weighted count of cut neighbor pairs, with
// weight cell * dphi / (2 |v|) per undirected direction v (dphi = angular
// share of that direction). The estimate is exact in expectation over
// uniformly random orientations.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "wetcluster/error.hpp"

namespace wetcluster {

struct StencilDirection {
  int dx = 0;
  int dy = 0;
  double weight = 0.0;  // per cut pair, in units of cell length
};

// Largest coordinate offset used by a neighborhood of the given size
// (8, 16, 32, 48 or 80 cells: every primitive offset up to that reach).
inline int stencil_reach(int neighborhood) {
  switch (neighborhood) {
    case 8: return 1;
    case 16: return 2;
    case 32: return 3;
    case 48: return 4;
    case 80: return 5;
    default: throw InvalidInput("stencil must be 8, 16, 32, 48 or 80");
  }
}

// Undirected directions of the neighborhood, sorted by angle in [0, pi),
// each with its unit-cell Crofton weight.
inline std::vector<StencilDirection> crofton_stencil(int neighborhood) {
  const int reach = stencil_reach(neighborhood);
  std::vector<StencilDirection> dirs;
  for (int dx = -reach; dx <= reach; ++dx)
    for (int dy = 0; dy <= reach; ++dy) {
      if (dy == 0 && dx <= 0) continue;
      if (std::gcd(dx, dy) != 1) continue;
      dirs.push_back({dx, dy});
    }
  std::sort(dirs.begin(), dirs.end(), [](const auto& a, const auto& b) {
    return std::atan2(a.dy, a.dx) < std::atan2(b.dy, b.dx);
  });
  const std::size_t n = dirs.size();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = std::atan2(dirs[i].dy, dirs[i].dx);
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = i == 0 ? phi[n - 1] - std::numbers::pi : phi[i - 1];
    const double next = i + 1 == n ? phi[0] + std::numbers::pi : phi[i + 1];
    const double dphi = 0.5 * (next - prev);
    dirs[i].weight = dphi / (2.0 * std::hypot(dirs[i].dx, dirs[i].dy));
  }
  return dirs;
}

// Crofton length per unit true length of a straight boundary at the given
// orientation (1 for a perfectly isotropic stencil).
inline double crofton_line_factor(int neighborhood, double angle) {
  double s = 0.0;
  for (const auto& d : crofton_stencil(neighborhood)) {
    const double phi = std::atan2(d.dy, d.dx);
    s += d.weight * std::hypot(d.dx, d.dy) * std::abs(std::sin(angle - phi));
  }
  return s;
}

}  // namespace wetcluster
