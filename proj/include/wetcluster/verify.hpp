#pragma once

// Structure checks on constructed arc clusters and optimized label fields.
// Arc-level checks use machine tolerances; lattice checks use raster
// tolerances. A failed arc check is a bug, a failed lattice check a finding.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wetcluster/measure.hpp"
#include "wetcluster/wetting.hpp"

namespace wetcluster {

enum class CheckStatus { pass, fail, skipped, info };

inline std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
    case CheckStatus::info: return "info";
  }
  return "unknown";
}

struct Measured {
  std::string name;
  double value = 0.0;
};

struct CheckEntry {
  std::string name;
  std::string property;  // the statement being checked
  std::string tier;      // "exact" or "raster"
  CheckStatus status = CheckStatus::skipped;
  std::vector<Measured> values;
  double tolerance = 0.0;
  std::string note;
  std::vector<Point2> evidence;  // coordinates of the measured features

  CheckEntry() = default;
  CheckEntry(std::string n, std::string p, std::string t)
      : name(std::move(n)), property(std::move(p)), tier(std::move(t)) {}

  void set(bool ok) { status = ok ? CheckStatus::pass : CheckStatus::fail; }
  void add(std::string n, double v) { values.push_back({std::move(n), v}); }
};

struct VerificationReport {
  std::string subject;
  std::vector<CheckEntry> checks;

  bool passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::fail; });
  }
  const CheckEntry* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

// Unit tangent of an interface leaving junction point p, if it ends there.
inline std::optional<Point2> tangent_leaving(const Interface& f, Point2 p, double tol = 1e-9) {
  if (f.chain.arcs.empty()) return std::nullopt;
  if (distance(f.chain.arcs.front().start, p) < tol) return endpoint_tangent(f.chain.arcs.front(), true);
  if (distance(f.chain.arcs.back().end, p) < tol) return -1.0 * endpoint_tangent(f.chain.arcs.back(), false);
  return std::nullopt;
}

inline double angle_between(Point2 a, Point2 b) { return std::abs(std::atan2(cross(a, b), dot(a, b))); }

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 d = b - a;
  const double l2 = dot(d, d);
  const double t = l2 > 0.0 ? std::clamp(dot(p - a, d) / l2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * d);
}

inline double spread_ratio(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += std::abs(x);
  mean /= static_cast<double>(v.size());
  return mean > 0.0 ? (*hi - *lo) / mean : 0.0;
}

inline Point2 wet_centroid(const LabelField& f) {
  Point2 c;
  std::size_t n = 0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.inside[k] && f.labels[k] == kWetCell) c = c + f.center(k), ++n;
  return n ? c / static_cast<double>(n) : c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Arc-cluster checks

// c_l kappa_l agree over all chamber-G interfaces; kappa_l is signed with the
// chamber on the left of travel.
inline CheckEntry check_curvature_condition(const ArcCluster& c, const Weights& w, double tol = 1e-9) {
  CheckEntry e{"curvature_condition", "weighted curvatures of all chamber-G arcs agree", "exact"};
  e.tolerance = tol;
  std::vector<double> ck;
  std::vector<int> seen;
  for (const auto& f : c.interfaces) {
    if ((f.left == kWet) == (f.right == kWet)) continue;
    const int l = f.left == kWet ? f.right : f.left;
    for (const auto& a : f.chain.arcs) {
      const double kappa = f.left == kWet ? -a.curvature : a.curvature;
      ck.push_back(w.c[l] * kappa);
      e.evidence.push_back(arc_midpoint(a));
    }
    if (std::find(seen.begin(), seen.end(), l) == seen.end()) seen.push_back(l);
  }
  if (seen.size() < 2) {
    e.status = CheckStatus::skipped;
    e.note = "fewer than two chambers border G";
    return e;
  }
  const auto [lo, hi] = std::minmax_element(ck.begin(), ck.end());
  e.add("min_c_kappa", *lo);
  e.add("max_c_kappa", *hi);
  e.add("spread", *hi - *lo);
  e.set(*hi - *lo <= tol);
  return e;
}

// At every cusp the wet arcs leave along the continuation of the dry segment.
inline CheckEntry check_cusp_tangency(const ArcCluster& c, double tol = 1e-8) {
  CheckEntry e{"cusp_tangency", "wet arcs meet the dry segment tangentially at each cusp", "exact"};
  e.tolerance = tol;
  double worst = 0.0;
  int cusps = 0, corners = 0;
  for (const auto& j : c.junctions) {
    if (j.kind == JunctionKind::boundary_corner) ++corners;
    if (j.kind != JunctionKind::interior_cusp) continue;
    std::optional<Point2> seg;
    std::vector<Point2> wet;
    for (int id : j.interfaces) {
      const auto& f = c.interfaces[static_cast<std::size_t>(id)];
      const auto t = detail::tangent_leaving(f, j.at);
      if (!t) continue;
      if (f.left == kWet || f.right == kWet) wet.push_back(*t);
      else seg = *t;
    }
    ++cusps;
    e.evidence.push_back(j.at);
    if (!seg || wet.size() != 2) {
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    for (const auto& t : wet) worst = std::max(worst, detail::angle_between(t, -1.0 * *seg));
  }
  if (cusps == 0) {
    e.status = CheckStatus::skipped;
    e.note = "no cusps";
    return e;
  }
  e.add("cusps", cusps);
  e.add("max_angle_rad", worst);
  if (corners) e.note = std::to_string(corners) + " boundary corner(s) exempt";
  e.set(worst <= tol);
  return e;
}

inline CheckEntry check_convexity(const ArcCluster& c) {
  CheckEntry e{"convexity", "every chamber component is convex", "exact"};
  int bad = 0;
  for (int l = 1; l <= c.chambers; ++l) {
    if (region_is_convex(c, l)) continue;
    ++bad;
    e.note += (e.note.empty() ? "non-convex: " : ", ") + std::to_string(l);
  }
  e.add("non_convex_chambers", bad);
  e.set(bad == 0);
  return e;
}

inline CheckEntry check_admissibility(const ArcCluster& c, const InstanceSpec& spec) {
  CheckEntry e{"admissibility", "cluster is admissible for the instance", "exact"};
  const auto v = validate(c, spec);
  e.add("wet_area", v.wet_area);
  for (const auto& n : v.notes) e.note += (e.note.empty() ? "" : "; ") + n;
  e.set(v.passed());
  return e;
}

inline CheckEntry check_junction_balance(const JunctionNetwork& n, double tol = 1e-8) {
  CheckEntry e{"junction_balance", "sine law and force balance at interior junctions", "exact"};
  e.tolerance = tol;
  if (n.topology.junctions == 0) {
    e.status = CheckStatus::skipped;
    e.note = "no interior junctions";
    return e;
  }
  for (int s = 0; s < n.topology.junctions; ++s) e.evidence.push_back(n.junctions[static_cast<std::size_t>(s)]);
  e.add("force_residual", n.force_residual);
  e.add("sine_residual", n.sine_residual);
  e.add("angle_residual", n.angle_residual);
  e.set(n.force_residual <= tol && n.sine_residual <= tol && n.angle_residual <= tol);
  return e;
}

inline VerificationReport verify_cluster(const ArcCluster& c, const InstanceSpec& spec,
                                         const JunctionNetwork* dry = nullptr) {
  VerificationReport r{"cluster", {}};
  r.checks.push_back(check_admissibility(c, spec));
  if (dry) r.checks.push_back(check_junction_balance(*dry));
  r.checks.push_back(check_curvature_condition(c, spec.weights));
  r.checks.push_back(check_cusp_tangency(c));
  r.checks.push_back(check_convexity(c));
  return r;
}

// ---------------------------------------------------------------------------
// Lattice checks

// Curvature of every chamber-G interface fitted in a window around G.
inline CheckEntry check_curvature_condition(const LabelField& f, const Weights& w, double tol = 0.10,
                                            std::optional<double> expected = std::nullopt) {
  CheckEntry e{"curvature_condition", "weighted curvatures of all chamber-G arcs agree", "raster"};
  e.tolerance = tol;
  if (f.count(kWet) == 0) {
    e.status = CheckStatus::skipped;
    e.note = "G is empty";
    return e;
  }
  const Point2 x = detail::wet_centroid(f);
  const double radius = std::max(3.0 * std::sqrt(f.wet_area()), 12 * f.cell);
  std::vector<double> ck;
  double worst_target = 0.0;
  for (int l = 1; l <= f.chambers; ++l) {
    if (interface_points(f, kWet, l, x, radius).size() < 8) continue;
    const auto k = measure_curvature(f, l, kWet, x, radius);
    e.add("kappa_" + std::to_string(l), k.curvature);
    e.add("rms_" + std::to_string(l), k.rms);
    ck.push_back(w.c[static_cast<std::size_t>(l)] * k.curvature);
    if (expected) worst_target = std::max(worst_target, std::abs(k.curvature - *expected) / std::abs(*expected));
  }
  e.evidence.push_back(x);
  if (ck.size() < 2) {
    e.status = CheckStatus::skipped;
    e.note = "fewer than two chambers border G";
    return e;
  }
  const double spread = detail::spread_ratio(ck);
  e.add("relative_spread", spread);
  bool ok = spread <= tol;
  if (expected) {
    e.add("expected_kappa", *expected);
    e.add("max_relative_error", worst_target);
    ok = ok && worst_target <= tol;
  }
  e.set(ok);
  return e;
}

inline CheckEntry check_convexity(const LabelField& f, double max_cells = 2.0) {
  CheckEntry e{"convexity", "every chamber component is convex (hull excess in cells)", "raster"};
  e.tolerance = max_cells;
  std::size_t worst = 0;
  for (int l = 1; l <= f.chambers; ++l) {
    const auto r = convexity_excess(f, l);
    e.add("excess_" + std::to_string(l), static_cast<double>(r.worst_excess));
    worst = std::max(worst, r.worst_excess);
  }
  e.set(static_cast<double>(worst) <= max_cells);
  return e;
}

// Wet area saturates the budget when the dry reference has junctions to
// wet; otherwise G stays (almost) empty.
inline CheckEntry check_saturation(const LabelField& f, double delta, bool has_junctions) {
  CheckEntry e{"saturation", "", "raster"};
  const double a = f.wet_area(), cell2 = f.cell_area();
  e.add("wet_area", a);
  e.add("delta", delta);
  if (delta == 0.0) {
    e.property = "no wet cells without a budget";
    e.set(a == 0.0);
  } else if (has_junctions) {
    e.property = "wet area equals the budget";
    e.tolerance = cell2;
    e.set(a >= delta - cell2 - 1e-15 && a <= delta + 1e-15);
  } else {
    e.property = "no junction to wet: wet area below 3 cells";
    e.tolerance = 3 * cell2;
    e.set(a < 3 * cell2);
  }
  return e;
}

inline CheckEntry check_cusp_count(const LabelField& f, std::size_t expected) {
  CheckEntry e{"cusp_count", "number of G corners where two chambers meet", "raster"};
  const auto c = find_cusps(f);
  e.add("cusps", static_cast<double>(c.count));
  e.add("expected", static_cast<double>(expected));
  e.evidence = c.points;
  e.set(c.count == expected);
  return e;
}

inline CheckEntry check_hausdorff(const LabelField& f, const ArcCluster& c, double max_cells = 4.0) {
  CheckEntry e{"hausdorff", "chambers lie within the tolerance of the constructed cluster", "raster"};
  e.tolerance = max_cells;
  double worst = 0.0;
  for (int l = 1; l <= f.chambers; ++l) {
    const auto h = hausdorff(f, c, l);
    const double cells = h.infinite ? std::numeric_limits<double>::infinity() : h.distance / f.cell;
    e.add("chamber_" + std::to_string(l) + "_cells", cells);
    worst = std::max(worst, cells);
  }
  e.set(worst <= max_cells);
  return e;
}

inline CheckEntry check_monotonicity(const LabelField& f, const Weights& w) {
  CheckEntry e{"monotonicity", "r -> energy(B_r(x))/r + L r is non-decreasing for the fitted L", "raster"};
  const auto m = monotonicity_profile(f, w);
  e.add("lambda_hat", m.lambda_hat);
  e.add("centers", static_cast<double>(m.centers.size()));
  e.evidence = m.centers;
  bool ok = true;
  for (const auto& p : m.profiles)
    for (std::size_t i = 1; i < p.size(); ++i)
      ok = ok && p[i] + m.lambda_hat * m.radii[i] >= p[i - 1] + m.lambda_hat * m.radii[i - 1] - 1e-9;
  e.set(ok && std::isfinite(m.lambda_hat));
  return e;
}

// Sparse chamber mass in B_r(x) should leave B_{r/4}(x) free of that chamber.
// Reported only; the density threshold is empirical.
inline CheckEntry infiltration_probe(const LabelField& f, double threshold = 0.05) {
  CheckEntry e{"infiltration_probe", "sparse chamber mass in B_r(x) leaves B_{r/4}(x) empty", "raster"};
  e.status = CheckStatus::info;
  e.tolerance = threshold;
  std::size_t triggered = 0, violated = 0;
  const int step = std::max(4, f.resolution / 16);
  for (int rc : {8, 16, 32}) {
    const double r = rc * f.cell;
    const double sparse = threshold * rc * rc;
    for (int j = kFieldMargin; j < f.ny - kFieldMargin; j += step)
      for (int i = kFieldMargin; i < f.nx - kFieldMargin; i += step) {
        const Point2 x = f.center(i, j);
        if (!f.inside[f.index(i, j)] || (f.domain == Domain::ball && norm(x) > 1.0 - r)) continue;
        std::vector<std::size_t> in_r(256, 0), in_q(256, 0);
        for (int q = std::max(0, j - rc); q <= std::min(f.ny - 1, j + rc); ++q)
          for (int p = std::max(0, i - rc); p <= std::min(f.nx - 1, i + rc); ++p) {
            const std::size_t k = f.index(p, q);
            if (!f.inside[k]) continue;
            const double d = distance(f.center(k), x);
            if (d < r) ++in_r[f.labels[k]];
            if (d < r / 4) ++in_q[f.labels[k]];
          }
        for (int l = 1; l <= f.chambers; ++l) {
          if (in_r[l] == 0 || static_cast<double>(in_r[l]) >= sparse) continue;
          ++triggered;
          if (in_q[l] > 0) {
            ++violated;
            if (e.evidence.size() < 16) e.evidence.push_back(x);
          }
        }
      }
  }
  e.add("triggered", static_cast<double>(triggered));
  e.add("violations", static_cast<double>(violated));
  return e;
}

struct FieldReference {
  double delta = 0.0;
  bool has_junctions = true;
  std::optional<double> kappa;          // predicted wet-arc curvature, chamber side
  std::optional<std::size_t> cusps;     // predicted cusp count
  const ArcCluster* cluster = nullptr;  // predicted cluster for the Hausdorff check
};

inline VerificationReport verify_field(const LabelField& f, const Weights& w, const FieldReference& ref) {
  VerificationReport r{"field", {}};
  r.checks.push_back(check_saturation(f, ref.delta, ref.has_junctions));
  r.checks.push_back(check_curvature_condition(f, w, 0.10, ref.kappa));
  if (ref.cusps) r.checks.push_back(check_cusp_count(f, *ref.cusps));
  r.checks.push_back(check_convexity(f));
  if (ref.cluster) r.checks.push_back(check_hausdorff(f, *ref.cluster));
  r.checks.push_back(check_monotonicity(f, w));
  r.checks.push_back(infiltration_probe(f));
  return r;
}

// Reference values for an equal-weight ball instance: the wetted cluster
// built from the best dry network.
inline FieldReference wetted_reference(const WettedCluster& wc) {
  FieldReference ref;
  ref.delta = wc.params.nothing_to_wet ? 0.0 : region_area(wc.cluster, kWet);
  ref.has_junctions = !wc.params.nothing_to_wet;
  if (wc.params.r > 0) {
    ref.kappa = 1.0 / wc.params.r;
    std::size_t n = 0;
    for (const auto& p : wc.pieces) n += p.cusps.size();
    ref.cusps = n;
  }
  ref.cluster = &wc.cluster;
  return ref;
}

// ---------------------------------------------------------------------------
// Convergence sweep

struct SweepPoint {
  double delta = 0.0;
  double energy_oracle = 0.0;
  double energy_predicted = 0.0;
  double wet_area = 0.0;
  double hausdorff_chambers = 0.0;  // max over chambers, to the dry minimizer
  double hausdorff_G_sigma = 0.0;   // sup over wet cells of the distance to the dry network
  std::uint64_t seed = 0;
  double cell = 0.0;
  bool converged = true;
};

// Largest distance from a wet cell center to the dry network segments.
inline double wet_to_network_distance(const LabelField& f, const JunctionNetwork& n) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k] || f.labels[k] != kWetCell) continue;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& e : n.topology.edges) d = std::min(d, detail::point_segment_distance(f.center(k), n.node(e.u), n.node(e.v)));
    s = std::max(s, d);
  }
  return s;
}

inline SweepPoint sweep_point(const OracleResult& o, const JunctionNetwork& dry, const BoundaryTrace& h,
                              double delta, double predicted, std::uint64_t seed) {
  SweepPoint p;
  p.delta = delta;
  p.energy_oracle = o.energy;
  p.energy_predicted = predicted;
  p.wet_area = o.field.wet_area();
  p.seed = seed;
  p.cell = o.field.cell;
  const auto dry_cluster = network_cluster(dry, h, o.field.chambers);
  for (int l = 1; l <= o.field.chambers; ++l) {
    const auto d = hausdorff(o.field, dry_cluster, l);
    if (d.infinite) p.converged = false;
    else p.hausdorff_chambers = std::max(p.hausdorff_chambers, d.distance);
  }
  p.hausdorff_G_sigma = wet_to_network_distance(o.field, dry);
  return p;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("loglog_slope: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw InvalidInput("loglog_slope: values must be positive");
    mx += std::log(x[i]), my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size()), my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my), sxx += dx * dx;
  }
  return sxy / sxx;
}

// Distances shrink with delta like a power in [lo, hi] (expected 1/2 since
// the wet radius scales with sqrt(delta)); energies do not increase with delta.
inline CheckEntry check_convergence(std::vector<SweepPoint> pts, double lo = 0.4, double hi = 0.6) {
  CheckEntry e{"convergence_sweep", "distances shrink like delta^(1/2); energy non-increasing in delta", "raster"};
  std::vector<SweepPoint> used;
  for (const auto& p : pts) {
    if (p.converged) used.push_back(p);
    else e.note += "excluded delta=" + std::to_string(p.delta) + " (not converged); ";
  }
  if (used.size() < 3) {
    e.status = CheckStatus::skipped;
    e.note += "fewer than 3 converged points";
    return e;
  }
  std::sort(used.begin(), used.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  bool mono_h = true, mono_g = true, mono_e = true;
  for (std::size_t i = 1; i < used.size(); ++i) {
    const double cell = used[i].cell;
    mono_h = mono_h && used[i].hausdorff_chambers <= used[i - 1].hausdorff_chambers + cell;
    mono_g = mono_g && used[i].hausdorff_G_sigma <= used[i - 1].hausdorff_G_sigma + cell;
    mono_e = mono_e && used[i - 1].energy_oracle <= used[i].energy_oracle + cell;
  }
  std::vector<double> d, h, g;
  for (const auto& p : used) d.push_back(p.delta), h.push_back(p.hausdorff_chambers), g.push_back(p.hausdorff_G_sigma);
  double sh = std::numeric_limits<double>::quiet_NaN(), sg = sh;
  try {
    sh = loglog_slope(d, h);
    sg = loglog_slope(d, g);
  } catch (const InvalidInput& ex) {
    e.note += ex.what();
  }
  e.add("exponent_chambers", sh);
  e.add("exponent_G_sigma", sg);
  e.add("monotone_chambers", mono_h);
  e.add("monotone_G_sigma", mono_g);
  e.add("energy_monotone", mono_e);
  char window[96];
  std::snprintf(window, sizeof window, "exponent window [%g, %g] derived from r ~ sqrt(delta)", lo, hi);
  e.note += window;
  e.set(mono_h && mono_g && mono_e && sh >= lo && sh <= hi && sg >= lo && sg <= hi);
  return e;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::ordered_json to_json(const CheckEntry& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["property"] = c.property;
  j["tier"] = c.tier;
  j["status"] = status_name(c.status);
  j["tolerance"] = c.tolerance;
  auto& v = j["values"] = nlohmann::ordered_json::object();
  for (const auto& m : c.values) {
    if (std::isfinite(m.value)) v[m.name] = m.value;
    else v[m.name] = m.value > 0 ? "inf" : (std::isnan(m.value) ? "nan" : "-inf");
  }
  auto& ev = j["evidence"] = nlohmann::ordered_json::array();
  for (const auto& p : c.evidence) ev.push_back({p.x, p.y});
  j["note"] = c.note;
  return j;
}

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["subject"] = r.subject;
  j["passed"] = r.passed();
  auto& cs = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) cs.push_back(to_json(c));
  return j;
}

inline std::string to_text(const VerificationReport& r) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-8s %-7s %s\n", "check", "status", "tier", "values");
  os << line;
  for (const auto& c : r.checks) {
    std::string vals;
    for (const auto& m : c.values) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%s=%.6g", vals.empty() ? "" : " ", m.name.c_str(), m.value);
      vals += buf;
    }
    std::snprintf(line, sizeof line, "%-22s %-8s %-7s ", c.name.c_str(), status_name(c.status).c_str(), c.tier.c_str());
    os << line << vals;
    if (!c.note.empty()) os << "  (" << c.note << ")";
    os << '\n';
  }
  os << (r.passed() ? "PASSED" : "FAILED") << '\n';
  return os.str();
}

}  // namespace wetcluster
