// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wetcluster/wetcluster.hpp"

using namespace wetcluster;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    if (!detail.empty()) detail += "; ";
    detail += buf;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

BoundaryTrace y_trace() { return {{{pi / 2, 1}, {7 * pi / 6, 2}, {11 * pi / 6, 3}}}; }

InstanceSpec ball_spec(BoundaryTrace h, Weights w, double delta) {
  InstanceSpec s;
  s.weights = std::move(w);
  s.delta = delta;
  s.trace = std::move(h);
  return s;
}

// Shared oracle runs at the default configuration.
struct Runs {
  std::map<std::pair<int, double>, OracleResult> y;
  std::map<std::pair<int, double>, double> wall;

  const OracleResult& y_run(int res, double delta) {
    const auto key = std::make_pair(res, delta);
    if (!y.count(key)) {
      OracleConfig c;
      c.resolution = res;
      const auto t = Clock::now();
      y.emplace(key, optimize(ball_spec(y_trace(), equal_weights(3), delta), c));
      wall[key] = seconds_since(t);
    }
    return y.at(key);
  }
};

const JunctionNetwork& dry_y() {
  static const JunctionNetwork n = best_dry(ball_spec(y_trace(), equal_weights(3), 0.0)).best.front();
  return n;
}

// Gap between three mutually tangent circles of radius r, integrated along
// its boundary by the trapezoid rule on n points in total.
std::pair<double, double> gap_area_and_arc(double r, int n) {
  const int per = n / 3;
  const double s = 2.0 * r / std::sqrt(3.0);
  double area = 0.0, length0 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double th = pi / 2 + 2 * pi * k / 3;
    const double cx = s * std::cos(th), cy = s * std::sin(th);
    // the arc faces the centroid; traversed clockwise about its center
    const double mid = th + pi;
    const double a0 = mid + pi / 6, a1 = mid - pi / 6;
    const double d = (a1 - a0) / per;
    double px = cx + r * std::cos(a0), py = cy + r * std::sin(a0);
    for (int i = 1; i <= per; ++i) {
      const double a = a0 + d * i;
      const double x = cx + r * std::cos(a), y = cy + r * std::sin(a);
      area += 0.5 * (px * y - x * py);
      if (k == 0) length0 += std::hypot(x - px, y - py);
      px = x;
      py = y;
    }
  }
  return {std::abs(area), length0};
}

Outcome criterion1() {
  Outcome o;
  const auto t = Clock::now();
  const auto tri = curvilinear_triangle(1.0);
  const auto [area, arc] = gap_area_and_arc(1.0, 1000000);
  const double dt = seconds_since(t);
  o.require(std::abs(tri.area - area) < 1e-9, "area %.12f vs quadrature %.12f", tri.area, area);
  o.require(std::abs(tri.arc_length - arc) < 1e-9, "arc %.12f vs quadrature %.12f", tri.arc_length, arc);
  double boundary_len = 0.0;
  for (const auto& a : tri.boundary.arcs) boundary_len += arc_length(a);
  o.require(std::abs(boundary_len - 3 * arc) < 1e-9, "boundary %.12f", boundary_len);
  o.require(std::abs(chain_area(tri.boundary) - area) < 1e-9, "chain area %.12f", chain_area(tri.boundary));
  o.require(dt < 1.0, "%.3f s", dt);
  return o;
}

Outcome criterion2() {
  Outcome o;
  // per-chamber length change when a 120 degree corner is replaced by a cusp
  // pair of tangent arcs: two straight pieces of r/sqrt3 become one arc r pi/3
  const double k = std::sqrt(3.0) - pi / 2;
  const double c_ref = (pi / 3 - 2 / std::sqrt(3.0)) / std::sqrt(k / 3);
  const double c = remark_constant();
  // the identity below pins c = (pi - 2 sqrt3) / sqrt(3 (sqrt3 - pi/2)) = -0.46368737;
  // the quoted -0.463688 is matched to one unit in its last digit
  o.require(std::abs(c - c_ref) < 1e-14 && std::abs(c + 0.463688) <= 1e-6 && c < 0, "c = %.9f", c);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double delta = 0.05 * (1.0 - u(rng));  // (0, 0.05]
    const auto wc = build_wetted(dry_y(), y_trace(), equal_weights(3), delta);
    const double r = wc.params.r;
    const double a_third = region_area(wc.cluster, kWet) / 3.0;
    worst = std::max(worst, std::abs(3 * c * std::sqrt(a_third) - (pi - 2 * std::sqrt(3.0)) * r));
    worst = std::max(worst, std::abs((energy(wc.cluster, equal_weights(3)) - 6.0) - 3 * c * std::sqrt(a_third)));
  }
  o.require(worst < 1e-12, "identity residual %.2e over 10 budgets", worst);
  return o;
}

// Opening angle at p between rays to a and b.
double opening(Point2 p, Point2 a, Point2 b) {
  const Point2 u = a - p, v = b - p;
  return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

Outcome criterion3() {
  Outcome o;
  const auto t = Clock::now();
  {
    const double a0 = 0.3, a1 = 2.5;
    const auto r = best_dry(ball_spec({{{a0, 1}, {a1, 2}}}, equal_weights(2), 0.0));
    const auto& n = r.best.front();
    const double chord = 2 * std::sin((a1 - a0) / 2);
    o.require(n.topology.junctions == 0 && std::abs(n.energy - 2 * chord) < 1e-12, "chord E %.12f vs %.12f", n.energy,
              2 * chord);
  }
  {
    const auto& n = dry_y();
    double worst = 0.0;
    for (int k = 0; k < 3; ++k)
      worst = std::max(worst, std::abs(opening(n.junctions[0], n.jump_points[k], n.jump_points[(k + 1) % 3]) - 2 * pi / 3));
    o.require(std::abs(n.energy - 6.0) < 1e-9 && worst < 1e-8, "Y E %.10f angle err %.1e", n.energy, worst);
  }
  {
    const Weights w{{1.0, 1.0, 1.3, 0.8}};
    const auto h = y_trace();
    const auto n = best_dry(ball_spec(h, w, 0.0)).best.front();
    if (n.junctions.size() != 1) {
      o.require(false, "general weights: %zu junctions", n.junctions.size());
    } else {
      // chamber of jump k lies between the rays to jumps k and k+1; the third
      // ray separates the other two chambers and carries c_m + c_q
      double lo = INFINITY, hi = -INFINITY;
      for (int k = 0; k < 3; ++k) {
        const int m = h.jumps[(k + 1) % 3].label, q = h.jumps[(k + 2) % 3].label;
        const double th = opening(n.junctions[0], n.jump_points[k], n.jump_points[(k + 1) % 3]);
        const double ratio = std::sin(th) / (w.c[m] + w.c[q]);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      o.require((hi - lo) / hi < 1e-8, "sine law residual %.1e", (hi - lo) / hi);
    }
  }
  const double dt = seconds_since(t);
  o.require(dt < 5.0, "%.2f s", dt);
  return o;
}

Outcome criterion4(Runs& runs) {
  Outcome o;
  const auto& dry = runs.y_run(256, 0.0);
  o.require(std::abs(dry.energy - 6.0) < 0.02 * 6.0, "Y dry E %.4f", dry.energy);
  const auto& wet = runs.y_run(256, 0.01);
  const double h2 = wet.field.cell * wet.field.cell;
  o.require(std::abs(wet.energy - 5.91969) < 0.02 * 5.91969, "Y wet E %.4f", wet.energy);
  o.require(std::abs(wet.field.wet_area() - 0.01) <= h2, "wet area %.6f", wet.field.wet_area());
  OracleConfig c;
  const auto t = Clock::now();
  const auto chord = optimize(ball_spec({{{0.0, 1}, {pi, 2}}}, equal_weights(2), 0.01), c);
  const double tc = seconds_since(t);
  o.require(chord.field.wet_area() < 3 * h2, "2-jump wet %.1f cells", chord.field.wet_area() / h2);
  o.require(std::abs(chord.energy - 4.0) < 0.02 * 4.0, "2-jump E %.4f", chord.energy);
  const double slowest = std::max({runs.wall[{256, 0.0}], runs.wall[{256, 0.01}], tc});
  o.require(slowest < 90.0, "slowest run %.1f s", slowest);
  return o;
}

Outcome criterion5(Runs& runs) {
  Outcome o;
  const auto& r = runs.y_run(256, 0.01);
  const auto wc = build_wetted(dry_y(), y_trace(), equal_weights(3), 0.01);
  auto ref = wetted_reference(wc);
  ref.delta = 0.01;
  const auto rep = verify_field(r.field, equal_weights(3), ref);
  for (const char* name : {"curvature_condition", "cusp_count", "convexity", "hausdorff"}) {
    const auto* e = rep.find(name);
    std::string vals;
    if (e)
      for (const auto& m : e->values) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%s=%.4g", vals.empty() ? "" : " ", m.name.c_str(), m.value);
        vals += buf;
      }
    o.require(e && e->status == CheckStatus::pass, "%s %s", name, vals.c_str());
  }
  return o;
}

Outcome criterion6(Runs& runs) {
  Outcome o;
  std::vector<SweepPoint> pts;
  const auto h = y_trace();
  for (double d : {0.04, 0.02, 0.01, 0.005}) {
    const auto& r = runs.y_run(256, d);
    const double predicted = build_wetted(dry_y(), h, equal_weights(3), d).predicted_energy;
    pts.push_back(sweep_point(r, dry_y(), h, d, predicted, OracleConfig{}.seed));
  }
  const auto e = check_convergence(pts);
  std::string vals;
  for (const auto& m : e.values) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s=%.4g", vals.empty() ? "" : " ", m.name.c_str(), m.value);
    vals += buf;
  }
  o.require(e.status == CheckStatus::pass, "%s", vals.c_str());
  return o;
}

// Random simple polygon: star-shaped about a random center.
Polygon random_star(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 3 + static_cast<int>(u(rng) * 12);
  std::vector<double> ang;
  for (int i = 0; i < n; ++i) ang.push_back(2 * pi * u(rng));
  std::sort(ang.begin(), ang.end());
  const Point2 c{u(rng) - 0.5, u(rng) - 0.5};
  Polygon p;
  for (double a : ang) p.push_back(c + polar(0.2 + 0.8 * u(rng), a));
  return p;
}

Polygon random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 3 + static_cast<int>(u(rng) * 6);
  std::vector<double> ang;
  for (int i = 0; i < n; ++i) ang.push_back(2 * pi * u(rng));
  std::sort(ang.begin(), ang.end());
  const Point2 c{0.6 * (u(rng) - 0.5), 0.6 * (u(rng) - 0.5)};
  const double rad = 0.3 + 1.2 * u(rng);
  Polygon p;
  for (double a : ang) p.push_back(c + polar(rad, a));
  return p;
}

GridSet random_band_raster(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int nx = 8 + static_cast<int>(u(rng) * 16), ny = 10 + static_cast<int>(u(rng) * 16);
  const double fill = 0.1 + 0.8 * u(rng);
  GridSet g({0, 0}, 1.0 / ny, nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) g.set(i, j, j < 2 || (j < ny - 2 && u(rng) < fill));
  for (int i : {0, nx - 1}) {
    const int top = 2 + static_cast<int>(u(rng) * (ny - 4));
    for (int j = 0; j < ny; ++j) g.set(i, j, j < top);
  }
  return g;
}

Outcome criterion7() {
  Outcome o;
  const auto t = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int hyp_bad = 0, hyp_strict_bad = 0, non_interval = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = random_band_raster(rng);
    const auto w = full_window(g);
    const auto s = hypograph_symmetrize(g, w);
    const double pg = crofton_relative_perimeter(g, w), ps = crofton_relative_perimeter(s, w);
    if (cell_count(s) != cell_count(g) || ps > pg + 1e-12) ++hyp_bad;
    bool split = false;
    for (int i = 0; i < g.nx && !split; ++i) {
      bool seen_empty = false;
      for (int j = 0; j < g.ny; ++j) {
        if (!g.at(i, j)) seen_empty = true;
        else if (seen_empty) split = true;
      }
    }
    non_interval += split;
    if (split && !(ps < pg - 1e-12)) ++hyp_strict_bad;
  }
  o.require(hyp_bad == 0 && hyp_strict_bad == 0, "hypograph %d violations, %d non-strict of %d split", hyp_bad,
            hyp_strict_bad, non_interval);

  int clip_bad = 0, clip_iff_bad = 0, clipped = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto e = random_star(rng);
    const auto k = random_convex(rng);
    const auto r = convex_clip(e, k);
    const double tol = 1e-9 * std::max(1.0, r.perimeter_in);
    if (r.perimeter_out > r.perimeter_in + tol) ++clip_bad;
    bool inside = true;
    const Polygon kk = counter_clockwise(k);
    for (const auto& p : e) inside = inside && point_in_polygon(kk, p);
    clipped += !inside;
    const bool equal = std::abs(r.perimeter_out - r.perimeter_in) <= tol;
    if (equal != inside) ++clip_iff_bad;
  }
  o.require(clip_bad == 0 && clip_iff_bad == 0, "convex clip %d gains, %d equality mismatches (%d clipped)", clip_bad,
            clip_iff_bad, clipped);

  const auto h = y_trace();
  const auto base = ball_field(h, 3, 64);
  int rep_bad = 0;
  double worst_gain = -INFINITY;
  for (int trial = 0; trial < 1000; ++trial) {
    auto f = base;
    const int blobs = 1 + static_cast<int>(u(rng) * 6);
    for (int b = 0; b < blobs; ++b) {
      const Point2 c = polar(std::sqrt(u(rng)), 2 * pi * u(rng));
      const double rad = 0.05 + 0.3 * u(rng);
      const int l = u(rng) < 0.15 ? kWet : 1 + static_cast<int>(u(rng) * 3) % 3;
      for (std::size_t q = 0; q < f.size(); ++q)
        if (f.inside[q] && !f.frozen[q] && norm(f.center(q) - c) < rad) f.labels[q] = cell_label(l);
    }
    const double before = lattice_energy(f, equal_weights(3));
    const auto g = repair_containment(f, h);
    const double gain = lattice_energy(g, equal_weights(3)) - before;
    worst_gain = std::max(worst_gain, gain / f.cell);
    if (!segments_contained(g, h) || gain > f.cell + 1e-12) ++rep_bad;
  }
  o.require(rep_bad == 0, "repair %d violations, worst gain %.3f cells", rep_bad, worst_gain);
  const double dt = seconds_since(t);
  o.require(dt < 30.0, "%.1f s", dt);
  return o;
}

Outcome criterion8(Runs& runs) {
  Outcome o;
  double lam[2];
  int k = 0;
  for (int res : {128, 256}) {
    const auto& f = runs.y_run(res, 0.01).field;
    const auto m = monotonicity_profile(f, equal_weights(3));
    double worst = 0.0;
    for (const auto& p : m.profiles)
      for (std::size_t i = 0; i + 1 < p.size(); ++i)
        worst = std::max(worst, (p[i] + m.lambda_hat * m.radii[i]) - (p[i + 1] + m.lambda_hat * m.radii[i + 1]));
    o.require(m.centers.size() == 20 && std::isfinite(m.lambda_hat) && worst < 1e-9,
              "res %d: lambda %.3f over %zu centers", res, m.lambda_hat, m.centers.size());
    lam[k++] = m.lambda_hat;
  }
  o.require(lam[1] <= 2.0 * lam[0], "ratio 256/128 = %.3f", lam[1] / lam[0]);
  return o;
}

}  // namespace

int main() {
  Runs runs;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"wetted junction geometry", criterion1},
      {"remark constant identity", criterion2},
      {"dry solver ground truths", criterion3},
      {"oracle agreement", [&] { return criterion4(runs); }},
      {"structure checks on optimized field", [&] { return criterion5(runs); }},
      {"convergence sweep", [&] { return criterion6(runs); }},
      {"lemma property suites", criterion7},
      {"monotonicity diagnostic", [&] { return criterion8(runs); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
