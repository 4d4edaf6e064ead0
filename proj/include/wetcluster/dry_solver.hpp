#pragma once

// Dry (delta = 0) minimizers on the unit disk.
//
// A candidate network is a planar forest whose leaves are jump points of the
// trace. A jump point carries one interface end (an ordinary jump) or two (a
// boundary triple junction); every tree is a full Steiner tree with degree-3
// interior junctions. Faces of the forest are chambers: each must touch the
// circle along arcs of a single label, and the two faces along every edge
// must differ. Junction positions are found by damped Newton on the weighted
// length.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wetcluster/model.hpp"

namespace wetcluster {

struct NetworkEdge {
  int u = 0;  // node ids: 0..J-1 are jump points, J.. are interior junctions
  int v = 0;
  int left = 0;  // chamber to the left of u -> v
  int right = 0;
};

struct Topology {
  int jumps = 0;
  int junctions = 0;             // interior (Steiner) points
  std::vector<int> jump_degree;  // 1 = ordinary jump, 2 = boundary triple junction
  std::vector<NetworkEdge> edges;

  std::string describe() const {
    std::string s;
    for (const auto& e : edges) {
      if (!s.empty()) s += ' ';
      auto name = [&](int n) { return n < jumps ? "x" + std::to_string(n) : "s" + std::to_string(n - jumps); };
      s += name(e.u) + "-" + name(e.v);
    }
    return s.empty() ? "empty" : s;
  }
};

struct JunctionNetwork {
  Topology topology;
  std::vector<Point2> jump_points;
  std::vector<Point2> junctions;
  double energy = 0.0;
  double force_residual = 0.0;  // max |sum_e w_e u_e| over interior junctions
  double sine_residual = 0.0;   // max relative spread of sin(theta_l)/(c_m+c_n)
  double angle_residual = 0.0;  // max |theta - 2pi/3| (equal weights only, else 0)
  int iterations = 0;
  bool converged = true;
  bool feasible = true;
  std::string note;

  Point2 node(int id) const {
    return id < topology.jumps ? jump_points[static_cast<std::size_t>(id)]
                               : junctions[static_cast<std::size_t>(id - topology.jumps)];
  }
};

namespace detail {

struct Terminal {
  int jump = 0;
  int copy = 0;
};

using Block = std::vector<int>;       // sorted terminal indices
using Partition = std::vector<Block>;

// Non-crossing partitions of terminals [lo, hi) into blocks of size >= 2,
// never placing two copies of one jump point in the same block.
inline void noncrossing(int lo, int hi, const std::vector<Terminal>& t, std::vector<Partition>& out) {
  if (lo >= hi) {
    out.push_back({});
    return;
  }
  // choose the block containing lo: a subset of (lo, hi) of size >= 1
  std::vector<int> members{lo};
  auto rec = [&](auto&& self, int next) -> void {
    if (members.size() >= 2) {
      // the gaps between consecutive members and after the last are
      // partitioned independently
      std::vector<std::pair<int, int>> ranges;
      for (std::size_t k = 0; k + 1 < members.size(); ++k) ranges.push_back({members[k] + 1, members[k + 1]});
      ranges.push_back({members.back() + 1, hi});
      std::vector<Partition> acc{{members}};
      for (auto [a, b] : ranges) {
        std::vector<Partition> sub;
        noncrossing(a, b, t, sub);
        std::vector<Partition> merged;
        for (const auto& p : acc)
          for (const auto& q : sub) {
            Partition m = p;
            m.insert(m.end(), q.begin(), q.end());
            merged.push_back(std::move(m));
          }
        acc = std::move(merged);
        if (acc.empty()) break;
      }
      out.insert(out.end(), acc.begin(), acc.end());
    }
    for (int k = next; k < hi; ++k) {
      bool clash = false;
      for (int m : members) clash = clash || t[m].jump == t[k].jump;
      if (clash) continue;
      members.push_back(k);
      self(self, k + 1);
      members.pop_back();
    }
  };
  rec(rec, lo + 1);
}

struct Subtree {
  int root = 0;
  std::vector<std::pair<int, int>> edges;  // (parent, child)
  int steiner = 0;
};

// Planar full binary trees over leaves[a..b] (in order). Leaves keep their
// terminal ids; Steiner points are numbered -1, -2, ... starting at -next.
inline std::vector<Subtree> planar_trees(const std::vector<int>& leaves, int a, int b, int next = 1) {
  if (a == b) return {{leaves[a], {}, 0}};
  std::vector<Subtree> out;
  for (int k = a; k < b; ++k)
    for (const auto& l : planar_trees(leaves, a, k, next + 1))
      for (const auto& r : planar_trees(leaves, k + 1, b, next + 1 + l.steiner)) {
        Subtree s;
        s.root = -next;
        s.steiner = 1 + l.steiner + r.steiner;
        s.edges = l.edges;
        s.edges.insert(s.edges.end(), r.edges.begin(), r.edges.end());
        s.edges.push_back({s.root, l.root});
        s.edges.push_back({s.root, r.root});
        out.push_back(std::move(s));
      }
  return out;
}

// Leaves (non-negative ids) reachable from `from` without crossing `avoid`.
inline void collect_side(int from, int avoid, const std::map<int, std::vector<int>>& adj, std::vector<int>& out) {
  if (from >= 0) out.push_back(from);
  for (int n : adj.at(from))
    if (n != avoid) collect_side(n, from, adj, out);
}

}  // namespace detail

// All planar degree-3 networks compatible with the trace. A constant trace
// yields the single empty network.
inline std::vector<Topology> enumerate_topologies(const BoundaryTrace& h, int max_junctions) {
  const int J = static_cast<int>(h.jump_count());
  if (J == 0) return {Topology{}};
  if (J > 12) throw InvalidInput("enumerate_topologies: more than 12 jumps is not supported");
  std::vector<Topology> result;
  for (int mask = 0; mask < (1 << J); ++mask) {
    std::vector<detail::Terminal> term;
    for (int i = 0; i < J; ++i) {
      term.push_back({i, 0});
      if (mask & (1 << i)) term.push_back({i, 1});
    }
    const int T = static_cast<int>(term.size());
    // gap g lies between terminal g and g+1; label 0 marks a virtual gap
    std::vector<int> gap_label(T);
    for (int g = 0; g < T; ++g) {
      const auto& a = term[g];
      const auto& b = term[(g + 1) % T];
      gap_label[g] = a.jump == b.jump && T > 1 ? 0 : h.jumps[a.jump].label;
    }
    std::vector<detail::Partition> parts;
    detail::noncrossing(0, T, term, parts);
    for (const auto& part : parts) {
      int steiner_total = 0;
      for (const auto& b : part) steiner_total += static_cast<int>(b.size()) - 2;
      if (steiner_total > max_junctions) continue;
      // face signature of each gap: interval index within every block
      std::vector<std::vector<int>> sig(T);
      for (int g = 0; g < T; ++g)
        for (const auto& b : part) {
          int id = static_cast<int>(b.size()) - 1;
          for (std::size_t j = 0; j + 1 < b.size(); ++j)
            if (g >= b[j] && g < b[j + 1]) id = static_cast<int>(j);
          sig[g].push_back(id);
        }
      std::map<std::vector<int>, int> face_label;
      bool ok = true;
      for (int g = 0; g < T && ok; ++g) {
        auto [it, inserted] = face_label.try_emplace(sig[g], gap_label[g]);
        if (!inserted && gap_label[g] != 0) {
          if (it->second == 0) it->second = gap_label[g];
          else if (it->second != gap_label[g]) ok = false;
        }
      }
      for (const auto& [s, l] : face_label) ok = ok && l != 0;
      if (!ok) continue;
      auto face_of_gap = [&](int g) { return face_label.at(sig[g]); };

      // cartesian product of planar trees over the blocks; each block's
      // tree hangs from its first leaf
      std::vector<std::vector<detail::Subtree>> per_block;
      for (const auto& b : part) {
        if (b.size() == 2) {
          per_block.push_back({{b[0], {{b[0], b[1]}}, 0}});
          continue;
        }
        std::vector<detail::Subtree> trees;
        for (auto t : detail::planar_trees(b, 1, static_cast<int>(b.size()) - 1)) {
          t.edges.push_back({b[0], t.root});
          t.root = b[0];
          trees.push_back(std::move(t));
        }
        per_block.push_back(std::move(trees));
      }
      std::vector<std::size_t> pick(part.size(), 0);
      while (true) {
        Topology topo;
        topo.jumps = J;
        topo.jump_degree.assign(J, 0);
        for (const auto& t : term) topo.jump_degree[t.jump]++;
        // renumber Steiner points globally as -1, -2, ...
        std::vector<std::pair<int, int>> raw;
        int used = 0;
        for (std::size_t bi = 0; bi < part.size(); ++bi) {
          const auto& tr = per_block[bi][pick[bi]];
          auto id = [&](int n) { return n >= 0 ? n : n - used; };
          for (auto [p, c] : tr.edges) raw.push_back({id(p), id(c)});
          used += static_cast<int>(part[bi].size()) - 2;
        }
        std::map<int, std::vector<int>> adj;
        for (auto [p, c] : raw) {
          adj[p].push_back(c);
          adj[c].push_back(p);
        }
        auto node_id = [&](int n) { return n >= 0 ? term[n].jump : J - n - 1; };
        bool valid = true;
        for (auto [p, c] : raw) {
          // orient p -> c: the left face follows the last leaf on c's side
          std::vector<int> side_a, side_b;
          detail::collect_side(p, c, adj, side_a);
          detail::collect_side(c, p, adj, side_b);
          std::vector<int> all = side_a;
          all.insert(all.end(), side_b.begin(), side_b.end());
          std::sort(all.begin(), all.end());
          std::sort(side_b.begin(), side_b.end());
          auto in_b = [&](int n) { return std::binary_search(side_b.begin(), side_b.end(), n); };
          int last_a = -1, last_b = -1;
          for (std::size_t k = 0; k < all.size(); ++k) {
            const int cur = all[k], nxt = all[(k + 1) % all.size()];
            if (in_b(cur) && !in_b(nxt)) last_b = cur;
            if (!in_b(cur) && in_b(nxt)) last_a = cur;
          }
          const int lf = face_of_gap(last_b), rf = face_of_gap(last_a);
          if (lf == rf) {
            valid = false;
            break;
          }
          topo.edges.push_back({node_id(p), node_id(c), lf, rf});
        }
        if (valid) {
          topo.junctions = used;
          result.push_back(std::move(topo));
        }
        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == per_block[k].size()) pick[k++] = 0;
        if (k == pick.size()) break;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Network solve

struct SolveOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-12;
  double min_edge = 1e-9;
};

namespace detail {

inline double network_length(const JunctionNetwork& n, const Weights& w) {
  double e = 0.0;
  for (const auto& ed : n.topology.edges) e += w.pair(ed.left, ed.right) * distance(n.node(ed.u), n.node(ed.v));
  return e;
}

// Chamber angles at an interior junction: for each incident edge (pointing
// away from the junction) the chamber between it and the next edge
// counter-clockwise.
struct JunctionAngles {
  std::vector<double> theta;  // opening angle of each incident chamber
  std::vector<int> chamber;
};

inline JunctionAngles junction_angles(const JunctionNetwork& n, int node) {
  struct Out {
    double ang;
    int ccw_face;  // face counter-clockwise of this outgoing ray
  };
  std::vector<Out> rays;
  const Point2 x = n.node(node);
  for (const auto& e : n.topology.edges) {
    if (e.u == node) rays.push_back({angle_of(n.node(e.v) - x), e.left});
    if (e.v == node) rays.push_back({angle_of(n.node(e.u) - x), e.right});
  }
  std::sort(rays.begin(), rays.end(), [](const Out& a, const Out& b) { return a.ang < b.ang; });
  JunctionAngles r;
  for (std::size_t k = 0; k < rays.size(); ++k) {
    double d = (k + 1 < rays.size() ? rays[k + 1].ang : rays[0].ang + kTwoPi) - rays[k].ang;
    r.theta.push_back(d);
    r.chamber.push_back(rays[k].ccw_face);
  }
  return r;
}

}  // namespace detail

// Junction coordinates minimizing sum_e (c_left + c_right) |e| for a fixed
// topology. Boundary triple junctions stay pinned at their jump points.
inline JunctionNetwork solve_network(const Topology& t, const BoundaryTrace& h, const Weights& w,
                                     const SolveOptions& opt = {}) {
  JunctionNetwork n;
  n.topology = t;
  for (int i = 0; i < t.jumps; ++i) n.jump_points.push_back(h.jump_point(static_cast<std::size_t>(i)));
  const int S = t.junctions;
  n.junctions.assign(S, Point2{});
  if (S > 0) {
    // Laplacian averaging from the origin as a planar starting layout
    for (int it = 0; it < 200; ++it)
      for (int s = 0; s < S; ++s) {
        Point2 sum{};
        int deg = 0;
        for (const auto& e : t.edges) {
          if (e.u == t.jumps + s) sum = sum + n.node(e.v), ++deg;
          if (e.v == t.jumps + s) sum = sum + n.node(e.u), ++deg;
        }
        n.junctions[s] = sum / deg;
      }
    using Vec = Eigen::VectorXd;
    using Mat = Eigen::MatrixXd;
    auto pack = [&] {
      Vec x(2 * S);
      for (int s = 0; s < S; ++s) x(2 * s) = n.junctions[s].x, x(2 * s + 1) = n.junctions[s].y;
      return x;
    };
    auto unpack = [&](const Vec& x) {
      for (int s = 0; s < S; ++s) n.junctions[s] = {x(2 * s), x(2 * s + 1)};
    };
    auto derivatives = [&](Vec& g, Mat& H) {
      g.setZero(2 * S);
      H.setZero(2 * S, 2 * S);
      double shortest = INFINITY;
      for (const auto& e : t.edges) {
        const double we = w.pair(e.left, e.right);
        const Point2 d = n.node(e.u) - n.node(e.v);
        const double len = norm(d);
        shortest = std::min(shortest, len);
        if (len < opt.min_edge) continue;
        const Eigen::Vector2d u(d.x / len, d.y / len);
        const Eigen::Matrix2d blk = we / len * (Eigen::Matrix2d::Identity() - u * u.transpose());
        const int iu = e.u - t.jumps, iv = e.v - t.jumps;
        if (iu >= 0) g.segment<2>(2 * iu) += we * u, H.block<2, 2>(2 * iu, 2 * iu) += blk;
        if (iv >= 0) g.segment<2>(2 * iv) -= we * u, H.block<2, 2>(2 * iv, 2 * iv) += blk;
        if (iu >= 0 && iv >= 0) H.block<2, 2>(2 * iu, 2 * iv) -= blk, H.block<2, 2>(2 * iv, 2 * iu) -= blk;
      }
      return shortest;
    };
    Vec x = pack(), g;
    Mat H;
    double f = detail::network_length(n, w);
    n.converged = false;
    for (n.iterations = 0; n.iterations < opt.max_iterations; ++n.iterations) {
      const double shortest = derivatives(g, H);
      if (shortest < opt.min_edge) {
        n.feasible = false;
        n.note = "edge collapsed";
        break;
      }
      if (g.norm() < opt.gradient_tol) {
        n.converged = true;
        break;
      }
      // Levenberg damping keeps the step defined when edges align
      const double mu = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      const Vec d = (H + mu * Mat::Identity(2 * S, 2 * S)).ldlt().solve(-g);
      // Once the predicted decrease is below the round-off of f, the energy
      // can no longer rank steps; take pure Newton steps judged by |g|.
      const bool roundoff = -g.dot(d) < 1e-13 * (1.0 + std::abs(f));
      double step = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60 && !roundoff; ++ls) {
        unpack(x + step * d);
        const double ft = detail::network_length(n, w);
        if (ft <= f + 1e-4 * step * g.dot(d)) {
          x += step * d;
          f = ft;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        unpack(x + d);
        Vec g2;
        Mat H2;
        derivatives(g2, H2);
        if (g2.norm() < g.norm()) {
          x += d;
          f = detail::network_length(n, w);
        } else {
          unpack(x);
          n.converged = g.norm() < opt.gradient_tol;
          if (!n.converged) n.note = "stalled at |g| = " + std::to_string(g.norm());
          break;
        }
      }
    }
    unpack(x);
    if (!n.converged && n.note.empty()) n.note = "iteration limit reached";
  }
  n.energy = detail::network_length(n, w);

  // residuals at interior junctions
  for (int s = 0; s < S; ++s) {
    const int id = t.jumps + s;
    Point2 force{};
    for (const auto& e : t.edges) {
      if (e.u != id && e.v != id) continue;
      const Point2 other = n.node(e.u == id ? e.v : e.u);
      force = force + w.pair(e.left, e.right) * unit(other - n.node(id));
    }
    n.force_residual = std::max(n.force_residual, norm(force));
    const auto ja = detail::junction_angles(n, id);
    if (ja.theta.size() == 3) {
      // sin(theta_l) / (c_m + c_n) for the chamber l opposite edge m|n
      double lo = INFINITY, hi = -INFINITY;
      for (int k = 0; k < 3; ++k) {
        const int l = ja.chamber[k], m = ja.chamber[(k + 1) % 3], q = ja.chamber[(k + 2) % 3];
        const double ratio = std::sin(ja.theta[k]) / (w.of(m) + w.of(q));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        (void)l;
      }
      n.sine_residual = std::max(n.sine_residual, (hi - lo) / std::max(hi, 1e-300));
      if (w.all_equal())
        for (double th : ja.theta) n.angle_residual = std::max(n.angle_residual, std::abs(th - kTwoPi / 3));
    }
  }

  // feasibility: junctions inside the disk, no crossings, segments clear
  for (const auto& p : n.junctions)
    if (!(norm(p) < 1.0)) {
      n.feasible = false;
      n.note = "junction left the disk";
    }
  const auto& E = t.edges;
  for (std::size_t a = 0; a < E.size() && n.feasible; ++a)
    for (std::size_t b = a + 1; b < E.size(); ++b) {
      const bool share = E[a].u == E[b].u || E[a].u == E[b].v || E[a].v == E[b].u || E[a].v == E[b].v;
      if (share) continue;
      if (segments_intersect(n.node(E[a].u), n.node(E[a].v), n.node(E[b].u), n.node(E[b].v), 1e-12)) {
        n.feasible = false;
        n.note = "edges cross";
        break;
      }
    }
  if (n.feasible && !h.constant())
    for (const auto& seg : circular_segments(h))
      for (const auto& e : E)
        for (const auto& p : sample_arc({n.node(e.u), n.node(e.v), 0.0}, 64))
          if (n.feasible && seg.contains(p, 1e-9)) {
            n.feasible = false;
            n.note = "edge enters a circular segment";
          }
  return n;
}

// The network as an arc cluster on the ball: the circle split by the trace
// plus one straight interface per edge.
inline ArcCluster network_cluster(const JunctionNetwork& n, const BoundaryTrace& h, int chambers) {
  ArcCluster c;
  c.domain = Domain::ball;
  c.chambers = chambers;
  c.interfaces = boundary_interfaces(h);
  const int base = static_cast<int>(c.interfaces.size());
  std::vector<std::vector<int>> incident(static_cast<std::size_t>(n.topology.jumps + n.topology.junctions));
  for (std::size_t k = 0; k < n.topology.edges.size(); ++k) {
    const auto& e = n.topology.edges[k];
    Interface f;
    f.chain.arcs = {{n.node(e.u), n.node(e.v), 0.0}};
    f.left = e.left;
    f.right = e.right;
    c.interfaces.push_back(std::move(f));
    incident[e.u].push_back(base + static_cast<int>(k));
    incident[e.v].push_back(base + static_cast<int>(k));
  }
  for (int i = 0; i < n.topology.jumps; ++i)
    c.junctions.push_back({n.node(i),
                           n.topology.jump_degree[i] == 2 ? JunctionKind::boundary_triple : JunctionKind::boundary_jump,
                           incident[i]});
  for (int s = 0; s < n.topology.junctions; ++s)
    c.junctions.push_back({n.junctions[s], JunctionKind::interior_triple, incident[n.topology.jumps + s]});
  return c;
}

struct DryResult {
  std::vector<JunctionNetwork> best;     // all minimizers within the tie tolerance
  std::vector<JunctionNetwork> others;   // remaining feasible networks by energy
  std::vector<JunctionNetwork> rejected; // infeasible or non-converged solves
  ArcCluster cluster;                    // assembled from best.front()
  bool convex = true;
};

inline DryResult best_dry(const InstanceSpec& spec, int max_junctions = -1, double tie_tol = 1e-9) {
  check_spec(spec);
  if (spec.domain != Domain::ball) throw InvalidInput("best_dry needs a ball instance");
  const auto& h = *spec.trace;
  if (max_junctions < 0) max_junctions = static_cast<int>(h.jump_count());
  std::vector<JunctionNetwork> feasible;
  DryResult r;
  for (const auto& t : enumerate_topologies(h, max_junctions)) {
    auto n = solve_network(t, h, spec.weights);
    if (n.feasible && n.converged) feasible.push_back(std::move(n));
    else r.rejected.push_back(std::move(n));
  }
  if (feasible.empty()) throw Infeasible("no feasible network for this trace");
  auto key = [](const JunctionNetwork& n) {
    std::vector<double> k;
    for (const auto& p : n.junctions) k.push_back(p.x), k.push_back(p.y);
    return k;
  };
  std::sort(feasible.begin(), feasible.end(), [&](const JunctionNetwork& a, const JunctionNetwork& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return key(a) < key(b);
  });
  const double e0 = feasible.front().energy;
  for (auto& n : feasible) (n.energy <= e0 + tie_tol ? r.best : r.others).push_back(std::move(n));
  std::sort(r.best.begin(), r.best.end(),
            [&](const JunctionNetwork& a, const JunctionNetwork& b) { return key(a) < key(b); });
  r.cluster = network_cluster(r.best.front(), h, spec.chambers());
  for (int l = 1; l <= spec.chambers(); ++l) {
    bool present = false;
    for (const auto& f : r.cluster.interfaces) present = present || f.left == l || f.right == l;
    if (present && !region_is_convex(r.cluster, l)) r.convex = false;
  }
  return r;
}

}  // namespace wetcluster
