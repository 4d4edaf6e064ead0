#pragma once

// Documents exchanged by the command line tool: instance and cluster JSON,
// label fields as plain PGM with a JSON sidecar, CSV traces and manifests.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wetcluster/lattice.hpp"
#include "wetcluster/verify.hpp"
#include "wetcluster/wetting.hpp"

namespace wetcluster {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

// Parses JSON; syntax errors report line and column.
inline Json parse_json(std::string_view text, const std::string& source = "") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw FormatError("malformed JSON", (source.empty() ? "" : source + ":") + std::to_string(line) + ":" +
                                            std::to_string(col));
  }
}

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw FormatError("expected an object", where);
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'", where);
  return *it;
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError("expected a number", where);
  return j.get<double>();
}

inline int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw FormatError("expected an integer", where);
  return j.get<int>();
}

inline std::string string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw FormatError("expected a string", where);
  return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError("expected an array", where);
  return j;
}

inline Point2 point(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw FormatError("expected [x, y]", where);
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline Json point(Point2 p) { return Json::array({p.x, p.y}); }

inline Json region(int r) { return r == kWet ? Json("G") : Json(r); }

inline int region(const Json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "G") return kWet;
  return integer(j, where);
}

inline JunctionKind junction_kind(const std::string& s, const std::string& where) {
  for (auto k : {JunctionKind::interior_cusp, JunctionKind::boundary_corner, JunctionKind::interior_triple,
                 JunctionKind::boundary_jump, JunctionKind::boundary_triple})
    if (junction_kind_name(k) == s) return k;
  throw FormatError("unknown junction kind '" + s + "'", where);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instances

inline Json to_json(const InstanceSpec& s) {
  Json j;
  j["domain"] = domain_name(s.domain);
  j["weights"] = s.weights.c;
  j["delta"] = s.delta;
  if (s.domain == Domain::ball && s.trace) {
    auto& t = j["trace"] = Json::array();
    for (const auto& x : s.trace->jumps) t.push_back(Json{{"angle", x.angle}, {"label", x.label}});
  } else if (s.masses) {
    j["masses"] = *s.masses;
  }
  return j;
}

// Structural parse; semantic checks are left to check_spec.
inline InstanceSpec instance_from_json(const Json& j) {
  using namespace detail;
  InstanceSpec s;
  const std::string dom = string(field(j, "domain", "instance"), "domain");
  if (dom == "ball") s.domain = Domain::ball;
  else if (dom == "plane") s.domain = Domain::plane;
  else throw FormatError("domain must be \"ball\" or \"plane\"", "domain");
  const auto& w = array(field(j, "weights", "instance"), "weights");
  for (std::size_t i = 0; i < w.size(); ++i) s.weights.c.push_back(number(w[i], "weights[" + std::to_string(i) + "]"));
  s.delta = j.contains("delta") ? number(j["delta"], "delta") : 0.0;
  if (s.domain == Domain::ball) {
    const auto& t = array(field(j, "trace", "instance"), "trace");
    BoundaryTrace h;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string at = "trace[" + std::to_string(i) + "]";
      h.jumps.push_back({number(field(t[i], "angle", at), at + ".angle"), integer(field(t[i], "label", at), at + ".label")});
    }
    s.trace = std::move(h);
  } else {
    const auto& m = array(field(j, "masses", "instance"), "masses");
    std::vector<double> masses;
    for (std::size_t i = 0; i < m.size(); ++i) masses.push_back(number(m[i], "masses[" + std::to_string(i) + "]"));
    s.masses = std::move(masses);
  }
  return s;
}

inline InstanceSpec parse_instance(std::string_view text, const std::string& source = "") {
  return instance_from_json(parse_json(text, source));
}

inline InstanceSpec read_instance(const std::string& path) { return parse_instance(read_text(path), path); }

// ---------------------------------------------------------------------------
// Clusters

inline Json to_json(const ArcCluster& c) {
  Json j;
  j["domain"] = domain_name(c.domain);
  j["chambers"] = c.chambers;
  auto& fs = j["interfaces"] = Json::array();
  for (const auto& f : c.interfaces) {
    Json arcs = Json::array();
    for (const auto& a : f.chain.arcs) arcs.push_back(Json::array({a.start.x, a.start.y, a.end.x, a.end.y, a.curvature}));
    fs.push_back(Json{{"left", detail::region(f.left)}, {"right", detail::region(f.right)}, {"arcs", std::move(arcs)}});
  }
  auto& js = j["junctions"] = Json::array();
  for (const auto& x : c.junctions)
    js.push_back(Json{{"at", detail::point(x.at)}, {"kind", junction_kind_name(x.kind)}, {"interfaces", x.interfaces}});
  return j;
}

inline ArcCluster cluster_from_json(const Json& j) {
  using namespace detail;
  ArcCluster c;
  const std::string dom = string(field(j, "domain", "cluster"), "cluster.domain");
  c.domain = dom == "plane" ? Domain::plane : Domain::ball;
  if (dom != "ball" && dom != "plane") throw FormatError("domain must be \"ball\" or \"plane\"", "cluster.domain");
  c.chambers = integer(field(j, "chambers", "cluster"), "cluster.chambers");
  const auto& fs = array(field(j, "interfaces", "cluster"), "cluster.interfaces");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string at = "cluster.interfaces[" + std::to_string(i) + "]";
    Interface f;
    f.left = region(field(fs[i], "left", at), at + ".left");
    f.right = region(field(fs[i], "right", at), at + ".right");
    const auto& arcs = array(field(fs[i], "arcs", at), at + ".arcs");
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const std::string ak = at + ".arcs[" + std::to_string(k) + "]";
      if (!arcs[k].is_array() || arcs[k].size() != 5) throw FormatError("expected [x0, y0, x1, y1, curvature]", ak);
      f.chain.arcs.push_back({{number(arcs[k][0], ak), number(arcs[k][1], ak)},
                              {number(arcs[k][2], ak), number(arcs[k][3], ak)},
                              number(arcs[k][4], ak)});
    }
    c.interfaces.push_back(std::move(f));
  }
  if (j.contains("junctions")) {
    const auto& js = array(j["junctions"], "cluster.junctions");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string at = "cluster.junctions[" + std::to_string(i) + "]";
      Junction x;
      x.at = point(field(js[i], "at", at), at + ".at");
      x.kind = junction_kind(string(field(js[i], "kind", at), at + ".kind"), at + ".kind");
      const auto& ids = array(field(js[i], "interfaces", at), at + ".interfaces");
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const int id = integer(ids[k], at + ".interfaces");
        if (id < 0 || id >= static_cast<int>(c.interfaces.size())) throw FormatError("interface index out of range", at);
        x.interfaces.push_back(id);
      }
      c.junctions.push_back(std::move(x));
    }
  }
  return c;
}

inline Json to_json(const JunctionNetwork& n, const BoundaryTrace& h, const Weights& w) {
  Json j;
  j["kind"] = "network";
  j["energy"] = n.energy;
  j["topology"] = n.topology.describe();
  auto& jp = j["jump_points"] = Json::array();
  for (const auto& p : n.jump_points) jp.push_back(detail::point(p));
  auto& js = j["junctions"] = Json::array();
  for (const auto& p : n.junctions) js.push_back(detail::point(p));
  auto& es = j["segments"] = Json::array();
  for (const auto& e : n.topology.edges)
    es.push_back(Json{{"from", detail::point(n.node(e.u))}, {"to", detail::point(n.node(e.v))}, {"left", e.left},
                      {"right", e.right}, {"length", distance(n.node(e.u), n.node(e.v))}});
  j["residuals"] = Json{{"force", n.force_residual}, {"sine_law", n.sine_residual}, {"angle", n.angle_residual}};
  j["converged"] = n.converged;
  j["cluster"] = to_json(network_cluster(n, h, w.chambers()));
  return j;
}

inline Json to_json(const WettedCluster& wc, const Weights& w, double delta) {
  Json j;
  j["kind"] = "wetted";
  j["delta"] = delta;
  j["radius"] = wc.params.r;
  j["kappa"] = wc.params.kappa;
  j["dry_energy"] = wc.dry_energy;
  j["predicted_energy"] = wc.predicted_energy;
  j["energy"] = energy(wc.cluster, w);
  j["wet_area"] = region_area(wc.cluster, kWet);
  auto& ps = j["pieces"] = Json::array();
  for (const auto& p : wc.pieces) {
    Json cusps = Json::array();
    for (const auto& c : p.cusps) cusps.push_back(detail::point(c));
    Json x{{"node", p.node}, {"boundary", p.boundary}, {"area", p.area}, {"chambers", p.chambers}, {"cusps", cusps}};
    if (p.corner) x["corner"] = detail::point(*p.corner);
    ps.push_back(std::move(x));
  }
  j["cluster"] = to_json(wc.cluster);
  return j;
}

// Cluster inside any cluster-bearing document (bare cluster, network, wetted).
inline ArcCluster cluster_in(const Json& j) {
  if (j.is_object() && j.contains("cluster")) return cluster_from_json(j["cluster"]);
  return cluster_from_json(j);
}

// ---------------------------------------------------------------------------
// Label fields

// Plain PGM (P2): comment lines carry the geometry, then one label per cell,
// row-major from the lowest row (y increasing). G is written as 255.
inline std::string field_to_pgm(const LabelField& f) {
  std::ostringstream os;
  char buf[256];
  os << "P2\n";
  std::snprintf(buf, sizeof buf, "# domain %s chambers %d resolution %d\n", domain_name(f.domain).c_str(), f.chambers,
                f.resolution);
  os << buf;
  std::snprintf(buf, sizeof buf, "# cell %.17g origin %.17g %.17g\n", f.cell, f.origin.x, f.origin.y);
  os << buf << f.nx << ' ' << f.ny << "\n255\n";
  for (int j = 0; j < f.ny; ++j) {
    for (int i = 0; i < f.nx; ++i) os << (i ? " " : "") << static_cast<int>(f.at(i, j));
    os << '\n';
  }
  return os.str();
}

inline Json field_sidecar(const LabelField& f, int stencil) {
  Json j;
  j["format"] = "pgm-p2";
  j["domain"] = domain_name(f.domain);
  j["chambers"] = f.chambers;
  j["resolution"] = f.resolution;
  j["stencil"] = stencil;
  j["cell"] = f.cell;
  j["origin"] = detail::point(f.origin);
  j["nx"] = f.nx;
  j["ny"] = f.ny;
  j["wet_label"] = static_cast<int>(kWetCell);
  j["wet_area"] = f.wet_area();
  auto& areas = j["chamber_areas"] = Json::array();
  for (int l = 1; l <= f.chambers; ++l) areas.push_back(f.area(l));
  return j;
}

inline LabelField field_from_pgm(std::string_view pgm, const Json& sidecar, const std::string& source = "field") {
  using namespace detail;
  const std::string dom = string(field(sidecar, "domain", "sidecar"), "sidecar.domain");
  const int chambers = integer(field(sidecar, "chambers", "sidecar"), "sidecar.chambers");
  const int res = integer(field(sidecar, "resolution", "sidecar"), "sidecar.resolution");
  const int stencil = sidecar.contains("stencil") ? integer(sidecar["stencil"], "sidecar.stencil") : 16;
  LabelField f;
  try {
    f = dom == "plane" ? plane_field(chambers, res, stencil) : ball_frame(chambers, res, stencil);
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), "sidecar");
  }
  std::istringstream in{std::string(pgm)};
  std::string tok;
  int line = 1;
  auto next = [&]() -> std::string {
    while (true) {
      const int ch = in.peek();
      if (ch == EOF) throw FormatError("unexpected end of field data", source + ":" + std::to_string(line));
      if (ch == '\n') ++line;
      if (std::isspace(ch)) {
        in.get();
      } else if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        ++line;
      } else {
        in >> tok;
        return tok;
      }
    }
  };
  if (next() != "P2") throw FormatError("expected plain PGM magic P2", source + ":1");
  auto as_int = [&](const std::string& t) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw FormatError("expected an integer, got '" + t + "'", source + ":" + std::to_string(line));
    }
  };
  const int nx = as_int(next()), ny = as_int(next());
  if (nx != f.nx || ny != f.ny)
    throw FormatError("dimensions " + std::to_string(nx) + "x" + std::to_string(ny) + " do not match the sidecar geometry",
                      source + ":" + std::to_string(line));
  if (as_int(next()) != 255) throw FormatError("maxval must be 255", source + ":" + std::to_string(line));
  for (std::size_t k = 0; k < f.size(); ++k) {
    const int v = as_int(next());
    const bool ok = v == kWetCell || (v >= 0 && v <= chambers);
    if (!ok) throw FormatError("label " + std::to_string(v) + " out of range", source + ":" + std::to_string(line));
    if (!f.inside[k] && v != 0) throw FormatError("nonzero label outside the domain", source + ":" + std::to_string(line));
    f.labels[k] = static_cast<std::uint8_t>(v);
  }
  return f;
}

inline void write_field(const std::string& stem, const LabelField& f, int stencil) {
  write_text(stem + ".pgm", field_to_pgm(f));
  write_text(stem + ".json", field_sidecar(f, stencil).dump(2) + "\n");
}

inline LabelField read_field(const std::string& pgm_path) {
  std::string stem = pgm_path;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".pgm") == 0) stem.resize(stem.size() - 4);
  const auto sidecar = parse_json(read_text(stem + ".json"), stem + ".json");
  return field_from_pgm(read_text(stem + ".pgm"), sidecar, stem + ".pgm");
}

// ---------------------------------------------------------------------------
// CSV

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string s = "sweep,temperature,energy,wet_area\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.sweep, r.temperature, r.energy, r.wet_area);
    s += buf;
  }
  return s;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& pts) {
  std::string s = "delta,energy_oracle,energy_predicted,wet_area,hausdorff_chambers,hausdorff_G_sigma,seed\n";
  char buf[256];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n", p.delta, p.energy_oracle,
                  p.energy_predicted, p.wet_area, p.hausdorff_chambers, p.hausdorff_G_sigma,
                  static_cast<unsigned long long>(p.seed));
    s += buf;
  }
  return s;
}

inline Json to_json(const OracleConfig& c) {
  Json j;
  j["resolution"] = c.resolution;
  j["stencil"] = c.stencil;
  j["t0_cells"] = c.t0_cells;
  j["cooling"] = c.cooling;
  j["sweeps"] = c.sweeps;
  j["moves_per_cell"] = c.moves_per_cell;
  j["polish_sweeps"] = c.polish_sweeps;
  j["seed"] = c.seed;
  j["flips"] = c.flips;
  j["swaps"] = c.swaps;
  j["wet_exchange"] = c.wet_exchange;
  return j;
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
  std::string command;
  std::string instance;
  Json instance_spec;  // the resolved instance, overrides applied
  Json config;         // every solver setting used
  std::map<std::string, std::string> overrides;
  std::uint64_t seed = 0;
  std::string out;
  std::string version = kToolVersion;
  double wall_clock = 0.0;  // seconds
  std::vector<std::string> artifacts;
};

inline Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["instance"] = m.instance;
  j["instance_spec"] = m.instance_spec;
  j["config"] = m.config;
  auto& o = j["overrides"] = Json::object();
  for (const auto& [k, v] : m.overrides) o[k] = v;
  j["seed"] = m.seed;
  j["out"] = m.out;
  j["tool_version"] = m.version;
  j["wall_clock_seconds"] = m.wall_clock;
  j["artifacts"] = m.artifacts;
  return j;
}

}  // namespace wetcluster
