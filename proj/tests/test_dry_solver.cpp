#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <set>

#include "wetcluster/dry_solver.hpp"

using namespace wetcluster;
using std::numbers::pi;

namespace {

InstanceSpec ball(BoundaryTrace h, Weights w) {
  InstanceSpec s;
  s.weights = std::move(w);
  s.trace = std::move(h);
  return s;
}

BoundaryTrace symmetric3(double phase = 0.0) {
  return {{{pi / 2 + phase, 1}, {7 * pi / 6 + phase, 2}, {11 * pi / 6 + phase, 3}}};
}

// ---------------------------------------------------------------------------
// Topology oracle: every set partition of the terminals, every tree shape
// per block, placed geometrically; crossings by direct segment tests and
// faces by flood fill on a raster.

struct OEdge {
  Point2 a, b;
};

bool proper_cross(Point2 p, Point2 q, Point2 r, Point2 s) {
  auto o = [](Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); };
  const double d1 = o(r, s, p), d2 = o(r, s, q), d3 = o(p, q, r), d4 = o(p, q, s);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && std::abs(d1) > 1e-12 && std::abs(d2) > 1e-12 &&
         std::abs(d3) > 1e-12 && std::abs(d4) > 1e-12;
}

double seg_dist(Point2 p, Point2 a, Point2 b) {
  const Point2 d = b - a;
  double t = ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / (d.x * d.x + d.y * d.y);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * d.x, p.y - a.y - t * d.y);
}

bool faces_valid(const std::vector<OEdge>& edges, const BoundaryTrace& h) {
  const int n = 360;
  const double cell = 2.0 / n;
  auto center = [&](int i, int j) { return Point2{-1 + (i + 0.5) * cell, -1 + (j + 0.5) * cell}; };
  std::vector<int> comp(n * n, -2);  // -2 outside/wall, -1 unvisited
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point2 p = center(i, j);
      if (std::hypot(p.x, p.y) >= 0.999) continue;
      bool wall = false;
      for (const auto& e : edges) wall = wall || seg_dist(p, e.a, e.b) < 1.2 * cell;
      if (!wall) comp[j * n + i] = -1;
    }
  std::vector<std::set<int>> labels;
  std::vector<int> sizes;
  int next = 0;
  for (int s = 0; s < n * n; ++s) {
    if (comp[s] != -1) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = next;
    labels.emplace_back();
    int size = 0;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      ++size;
      const int i = c % n, j = c / n;
      const Point2 p = center(i, j);
      const double r = std::hypot(p.x, p.y);
      bool near_jump = false;
      for (std::size_t k = 0; k < h.jumps.size(); ++k) near_jump = near_jump || distance(p, h.jump_point(k)) < 0.08;
      if (r > 0.97 && !near_jump) labels.back().insert(h.label_at(std::atan2(p.y, p.x)));
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= n || b >= n || comp[b * n + a] != -1) continue;
        comp[b * n + a] = next;
        q.push(b * n + a);
      }
    }
    sizes.push_back(size);
    ++next;
  }
  for (int c = 0; c < next; ++c)
    if (sizes[c] > 30 && labels[c].size() != 1) return false;
  auto label_near = [&](Point2 p) -> int {
    const int i = static_cast<int>((p.x + 1) / cell), j = static_cast<int>((p.y + 1) / cell);
    const int c = comp[j * n + i];
    return c >= 0 && !labels[c].empty() ? *labels[c].begin() : -1;
  };
  for (const auto& e : edges) {
    const Point2 m = 0.5 * (e.a + e.b), d = unit(e.b - e.a), nrm{-d.y, d.x};
    const int l = label_near(m + 4 * cell * nrm), r = label_near(m - 4 * cell * nrm);
    if (l < 0 || r < 0 || l == r) return false;
  }
  return true;
}

void set_partitions(int k, int n, std::vector<std::vector<int>>& cur, std::vector<std::vector<std::vector<int>>>& out) {
  if (k == n) {
    out.push_back(cur);
    return;
  }
  for (std::size_t b = 0; b < cur.size(); ++b) {
    cur[b].push_back(k);
    set_partitions(k + 1, n, cur, out);
    cur[b].pop_back();
  }
  cur.push_back({k});
  set_partitions(k + 1, n, cur, out);
  cur.pop_back();
}

int oracle_topology_count(const BoundaryTrace& h) {
  const int J = static_cast<int>(h.jumps.size());
  std::set<std::vector<std::array<long, 4>>> seen;
  for (int mask = 0; mask < (1 << J); ++mask) {
    std::vector<int> jump_of;
    for (int i = 0; i < J; ++i) {
      jump_of.push_back(i);
      if (mask & (1 << i)) jump_of.push_back(i);
    }
    std::vector<std::vector<std::vector<int>>> parts;
    std::vector<std::vector<int>> cur;
    set_partitions(0, static_cast<int>(jump_of.size()), cur, parts);
    for (const auto& part : parts) {
      bool ok = true;
      for (const auto& b : part) {
        std::set<int> js;
        for (int t : b) js.insert(jump_of[t]);
        ok = ok && b.size() >= 2 && b.size() <= 4 && js.size() == b.size();
      }
      if (!ok) continue;
      // tree shapes: size 4 blocks have three pairings
      std::vector<int> shapes;
      for (const auto& b : part) shapes.push_back(b.size() == 4 ? 3 : 1);
      std::vector<int> pick(part.size(), 0);
      while (true) {
        std::vector<OEdge> edges;
        for (std::size_t bi = 0; bi < part.size(); ++bi) {
          std::vector<Point2> p;
          for (int t : part[bi]) p.push_back(h.jump_point(jump_of[t]));
          if (p.size() == 2) {
            edges.push_back({p[0], p[1]});
          } else if (p.size() == 3) {
            const Point2 s = (1.0 / 3) * (p[0] + p[1] + p[2]);
            for (auto& q : p) edges.push_back({s, q});
          } else {
            static const int pair_of[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
            const auto* pr = pair_of[pick[bi]];
            const Point2 c = 0.25 * (p[0] + p[1] + p[2] + p[3]);
            const Point2 s1 = 0.5 * (0.5 * (p[pr[0]] + p[pr[1]]) + c);
            const Point2 s2 = 0.5 * (0.5 * (p[pr[2]] + p[pr[3]]) + c);
            edges.push_back({s1, p[pr[0]]});
            edges.push_back({s1, p[pr[1]]});
            edges.push_back({s2, p[pr[2]]});
            edges.push_back({s2, p[pr[3]]});
            edges.push_back({s1, s2});
          }
        }
        bool crossing = false;
        for (std::size_t a = 0; a < edges.size(); ++a)
          for (std::size_t b = a + 1; b < edges.size(); ++b)
            crossing = crossing || proper_cross(edges[a].a, edges[a].b, edges[b].a, edges[b].b);
        // copies of a jump point are interchangeable: key networks by geometry
        std::vector<std::array<long, 4>> key;
        for (const auto& e : edges) {
          std::array<long, 4> k{std::lround(e.a.x * 1e6), std::lround(e.a.y * 1e6), std::lround(e.b.x * 1e6),
                                std::lround(e.b.y * 1e6)};
          if (std::pair{k[2], k[3]} < std::pair{k[0], k[1]}) k = {k[2], k[3], k[0], k[1]};
          key.push_back(k);
        }
        std::sort(key.begin(), key.end());
        const bool doubled = std::adjacent_find(key.begin(), key.end()) != key.end();
        if (!crossing && !doubled && !seen.contains(key) && faces_valid(edges, h)) seen.insert(key);
        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == shapes[k]) pick[k++] = 0;
        if (k == pick.size()) break;
      }
    }
  }
  return static_cast<int>(seen.size());
}

}  // namespace

TEST(Enumerate, ExampleCounts) {
  EXPECT_EQ(enumerate_topologies({{{0.3, 1}, {2.0, 2}}}, 2).size(), 1u);
  EXPECT_EQ(enumerate_topologies(symmetric3(), 3).size(), 4u);
  EXPECT_EQ(enumerate_topologies({{{pi / 4, 1}, {3 * pi / 4, 2}, {5 * pi / 4, 1}, {7 * pi / 4, 2}}}, 4).size(), 2u);
  const auto constant = enumerate_topologies({{{0.0, 1}}}, 3);
  ASSERT_EQ(constant.size(), 1u);
  EXPECT_TRUE(constant[0].edges.empty());
}

TEST(Enumerate, MatchesFloodFillOracle) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<std::vector<int>> patterns{{1, 2}, {1, 2, 3}, {2, 3, 1}, {1, 2, 1, 2}, {1, 2, 3, 4},
                                               {1, 2, 3, 2}, {1, 3, 1, 2}, {3, 1, 2, 4}};
  for (const auto& labels : patterns) {
    const int J = static_cast<int>(labels.size());
    BoundaryTrace h;
    for (int i = 0; i < J; ++i) h.jumps.push_back({2 * pi * (i + 0.15 + 0.5 * u(rng)) / J, labels[i]});
    const auto mine = enumerate_topologies(h, J);
    EXPECT_EQ(static_cast<int>(mine.size()), oracle_topology_count(h)) << "pattern size " << J;
  }
}

TEST(SolveNetwork, SymmetricY) {
  const auto r = best_dry(ball(symmetric3(), equal_weights(3)));
  ASSERT_EQ(r.best.size(), 1u);
  const auto& n = r.best[0];
  EXPECT_NEAR(n.energy, 6.0, 1e-9);
  ASSERT_EQ(n.junctions.size(), 1u);
  EXPECT_LT(norm(n.junctions[0]), 1e-10);
  EXPECT_LT(n.angle_residual, 1e-8);
  EXPECT_LT(n.force_residual, 1e-10);
  EXPECT_TRUE(n.converged);
  EXPECT_TRUE(r.convex);
  // every other feasible topology (boundary triple junctions) costs more
  EXPECT_EQ(r.others.size(), 3u);
  for (const auto& o : r.others) EXPECT_GT(o.energy, 6.0 + 0.5);
  EXPECT_NEAR(energy(r.cluster, equal_weights(3)), 6.0, 1e-9);
  InstanceSpec spec = ball(symmetric3(), equal_weights(3));
  const auto rep = validate(r.cluster, spec);
  for (const auto& note : rep.notes) ADD_FAILURE() << note;
}

TEST(SolveNetwork, TwoJumpsGiveChord) {
  const auto r = best_dry(ball({{{0.0, 1}, {pi / 2, 2}}}, equal_weights(2)));
  ASSERT_EQ(r.best.size(), 1u);
  EXPECT_TRUE(r.best[0].junctions.empty());
  EXPECT_DOUBLE_EQ(r.best[0].energy, 2.0 * distance(polar(1.0, 0.0), polar(1.0, pi / 2)));
  EXPECT_NEAR(r.best[0].energy, 2 * std::sqrt(2.0), 1e-15);
}

TEST(SolveNetwork, ConstantTrace) {
  const auto r = best_dry(ball({{{1.0, 1}}}, equal_weights(1)));
  EXPECT_EQ(r.best[0].energy, 0.0);
  EXPECT_TRUE(r.best[0].topology.edges.empty());
  EXPECT_NEAR(region_area(r.cluster, 1), pi, 1e-12);
}

TEST(SolveNetwork, GeneralWeightsSineLaw) {
  const Weights w{{1.0, 1.0, 1.0, 1.2}};
  const auto r = best_dry(ball(symmetric3(), w));
  const auto& n = r.best.at(0);
  ASSERT_EQ(n.junctions.size(), 1u);
  EXPECT_LT(n.sine_residual, 1e-8);
  EXPECT_LT(n.force_residual, 1e-10);
  EXPECT_GT(norm(n.junctions[0]), 1e-3);  // symmetry is broken
  // the costlier chamber 3 gives up area
  EXPECT_LT(region_area(r.cluster, 3), region_area(r.cluster, 1));
  EXPECT_TRUE(r.convex);
}

TEST(SolveNetwork, TiesAreAllReported) {
  const auto r = best_dry(ball({{{pi / 4, 1}, {3 * pi / 4, 2}, {5 * pi / 4, 1}, {7 * pi / 4, 2}}}, equal_weights(2)));
  ASSERT_EQ(r.best.size(), 2u);
  EXPECT_NEAR(r.best[0].energy, 4 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.best[1].energy, r.best[0].energy, 1e-12);
}

TEST(SolveNetwork, RotationEquivariance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  const Weights w{{1.0, 1.1, 0.9, 1.05, 1.2}};
  for (int trial = 0; trial < 10; ++trial) {
    BoundaryTrace h;
    const std::vector<int> labels{1, 2, 3, 4};
    for (int i = 0; i < 4; ++i) h.jumps.push_back({2 * pi * (i + 0.2 + 0.6 * u(rng)) / 4, labels[i]});
    const double phi = 0.2 + 0.3 * u(rng);
    BoundaryTrace rot = h;
    for (auto& j : rot.jumps) j.angle += phi;
    if (rot.jumps.back().angle >= 2 * pi) {
      // keep angles in [0, 2pi) by cycling the list
      auto last = rot.jumps.back();
      last.angle -= 2 * pi;
      rot.jumps.pop_back();
      rot.jumps.insert(rot.jumps.begin(), last);
    }
    const auto a = best_dry(ball(h, w)), b = best_dry(ball(rot, w));
    EXPECT_NEAR(a.best[0].energy, b.best[0].energy, 1e-9);
    ASSERT_EQ(a.best[0].junctions.size(), b.best[0].junctions.size());
    std::vector<Point2> pa, pb = b.best[0].junctions;
    for (const auto& p : a.best[0].junctions) pa.push_back(rotate(p, phi));
    for (const auto& p : pa) {
      double best = INFINITY;
      for (const auto& q : pb) best = std::min(best, distance(p, q));
      EXPECT_LT(best, 1e-9);
    }
    for (const auto& o : a.others) EXPECT_GE(o.energy, a.best[0].energy);
    EXPECT_TRUE(a.convex);
  }
}

TEST(SolveNetwork, RejectsPlaneDomain) {
  InstanceSpec s;
  s.domain = Domain::plane;
  s.weights = equal_weights(1);
  s.masses = std::vector<double>{1.0};
  EXPECT_THROW(best_dry(s), InvalidInput);
}
