#pragma once

// Batch front end: solve-dry | wet | oracle | verify | sweep | render.
// Exit status: 0 success, 1 verification failed, 2 malformed input,
// 3 infeasible instance.

#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wetcluster/serialize.hpp"
#include "wetcluster/svg.hpp"

namespace wetcluster {

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitMalformed = 2, kExitInfeasible = 3 };

struct CliOptions {
  std::string instance;
  std::optional<double> delta;
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;
  std::optional<int> stencil;
  std::optional<int> sweeps;
  std::optional<int> moves;
  std::optional<int> polish;
  int max_junctions = -1;
  std::string out;
  // verify
  std::string cluster;
  std::string field;
  // sweep
  std::vector<double> deltas{0.04, 0.02, 0.01, 0.005};
  int jobs = 0;
  // render
  std::string input;
  std::string output;
};

namespace cli {

namespace fs = std::filesystem;

struct Context {
  const CliOptions& opt;
  std::ostream& out;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

inline InstanceSpec load_instance(Context& cx) {
  if (cx.opt.instance.empty()) throw FormatError("missing --instance", "command line");
  auto s = read_instance(cx.opt.instance);
  if (cx.opt.delta) {
    s.delta = *cx.opt.delta;
    cx.manifest.overrides["delta"] = std::to_string(*cx.opt.delta);
  }
  check_spec(s);
  cx.manifest.instance = cx.opt.instance;
  cx.manifest.instance_spec = to_json(s);
  return s;
}

inline OracleConfig oracle_config(Context& cx) {
  OracleConfig c;
  const auto& o = cx.opt;
  auto note = [&](const char* k, auto v) { cx.manifest.overrides[k] = std::to_string(v); };
  if (o.resolution) c.resolution = *o.resolution, note("resolution", *o.resolution);
  if (o.stencil) c.stencil = *o.stencil, note("stencil", *o.stencil);
  if (o.seed) c.seed = *o.seed, note("seed", *o.seed);
  if (o.sweeps) c.sweeps = *o.sweeps, note("sweeps", *o.sweeps);
  if (o.moves) c.moves_per_cell = *o.moves, note("moves", *o.moves);
  if (o.polish) c.polish_sweeps = *o.polish, note("polish", *o.polish);
  check_config(c);
  cx.manifest.seed = c.seed;
  cx.manifest.config = to_json(c);
  return c;
}

inline std::string out_path(Context& cx, const std::string& name) {
  const fs::path p = fs::path(cx.opt.out) / name;
  cx.manifest.artifacts.push_back(name);
  return p.string();
}

inline void begin(Context& cx, const std::string& command) {
  cx.manifest.command = command;
  cx.manifest.out = cx.opt.out;
  if (!cx.opt.out.empty()) fs::create_directories(cx.opt.out);
}

inline void finish(Context& cx) {
  cx.manifest.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - cx.start).count();
  if (!cx.opt.out.empty())
    write_text((fs::path(cx.opt.out) / "manifest.json").string(), to_json(cx.manifest).dump(2) + "\n");
}

inline void emit(Context& cx, const std::string& name, const std::string& text) {
  if (!cx.opt.out.empty()) write_text(out_path(cx, name), text);
}

inline int solve_dry(Context& cx) {
  begin(cx, "solve-dry");
  const auto s = load_instance(cx);
  if (s.domain != Domain::ball) throw InvalidInput("solve-dry needs a ball instance (plane instances use oracle)");
  if (cx.opt.max_junctions >= 0) cx.manifest.overrides["max_junctions"] = std::to_string(cx.opt.max_junctions);
  cx.manifest.config = Json{{"max_junctions", cx.opt.max_junctions}};
  const auto r = best_dry(s, cx.opt.max_junctions);
  const auto& n = r.best.front();
  emit(cx, "network.json", to_json(n, *s.trace, s.weights).dump(2) + "\n");
  emit(cx, "network.svg", render_svg(r.cluster));
  char buf[160];
  std::snprintf(buf, sizeof buf, "energy %.12f  topology %s  minimizers %zu\n", n.energy, n.topology.describe().c_str(),
                r.best.size());
  cx.out << buf;
  finish(cx);
  return kExitOk;
}

inline int wet(Context& cx) {
  begin(cx, "wet");
  const auto s = load_instance(cx);
  if (s.domain != Domain::ball) throw InvalidInput("wet needs a ball instance");
  const auto dry = best_dry(s, cx.opt.max_junctions).best.front();
  const auto wc = build_wetted(dry, *s.trace, s.weights, s.delta);
  emit(cx, "wetted.json", to_json(wc, s.weights, s.delta).dump(2) + "\n");
  emit(cx, "wetted.svg", render_svg(wc.cluster));
  char buf[200];
  std::snprintf(buf, sizeof buf, "energy %.12f  predicted %.12f  radius %.9f  wet_area %.12f\n", energy(wc.cluster, s.weights),
                wc.predicted_energy, wc.params.r, region_area(wc.cluster, kWet));
  cx.out << buf;
  finish(cx);
  return kExitOk;
}

inline int oracle(Context& cx) {
  begin(cx, "oracle");
  const auto s = load_instance(cx);
  const auto c = oracle_config(cx);
  const auto r = optimize(s, c);
  if (!cx.opt.out.empty()) {
    write_field(out_path(cx, "field"), r.field, c.stencil);
    cx.manifest.artifacts.back() = "field.pgm";
    cx.manifest.artifacts.push_back("field.json");
  }
  emit(cx, "trace.csv", trace_csv(r.trace));
  emit(cx, "field.svg", render_svg(r.field));
  Json summary{{"energy", r.energy},          {"initial_energy", r.initial_energy}, {"wet_area", r.field.wet_area()},
               {"wet_cap_cells", r.wet_cap}, {"accepted", r.accepted},             {"proposed", r.proposed}};
  emit(cx, "oracle.json", summary.dump(2) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof buf, "energy %.9f  wet_area %.9f  accepted %llu/%llu\n", r.energy, r.field.wet_area(),
                static_cast<unsigned long long>(r.accepted), static_cast<unsigned long long>(r.proposed));
  cx.out << buf;
  finish(cx);
  return kExitOk;
}

inline int verify(Context& cx) {
  begin(cx, "verify");
  if (cx.opt.cluster.empty() == cx.opt.field.empty()) throw FormatError("give exactly one of --cluster or --field", "command line");
  const auto s = load_instance(cx);
  VerificationReport rep;
  if (!cx.opt.cluster.empty()) {
    const auto doc = parse_json(read_text(cx.opt.cluster), cx.opt.cluster);
    const auto c = cluster_in(doc);
    check_structure(c);
    rep = verify_cluster(c, s);
    rep.subject = cx.opt.cluster;
  } else {
    const auto f = read_field(cx.opt.field);
    if (f.chambers != s.chambers()) throw FormatError("field chamber count does not match the instance", cx.opt.field);
    if (s.domain == Domain::ball && s.weights.all_equal()) {
      const auto dry = best_dry(s, cx.opt.max_junctions).best.front();
      const auto wc = build_wetted(dry, *s.trace, s.weights, s.delta);
      auto ref = wetted_reference(wc);
      ref.delta = s.delta;
      rep = verify_field(f, s.weights, ref);
    } else {
      FieldReference ref;
      ref.delta = s.delta;
      rep = verify_field(f, s.weights, ref);
    }
    rep.subject = cx.opt.field;
  }
  cx.out << to_text(rep);
  emit(cx, "report.json", to_json(rep).dump(2) + "\n");
  emit(cx, "report.txt", to_text(rep));
  finish(cx);
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

inline int sweep(Context& cx) {
  begin(cx, "sweep");
  auto base = load_instance(cx);
  if (base.domain != Domain::ball) throw InvalidInput("sweep needs a ball instance");
  const auto c = oracle_config(cx);
  const auto dry = best_dry(base, cx.opt.max_junctions).best.front();
  std::vector<std::future<SweepPoint>> runs;
  std::vector<std::string> dirs;
  const unsigned jobs = cx.opt.jobs > 0 ? cx.opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepPoint> pts;
  auto run_one = [&, base](double delta, std::string dir) {
    InstanceSpec s = base;
    s.delta = delta;
    const auto r = optimize(s, c);
    double predicted = std::numeric_limits<double>::quiet_NaN();
    if (s.weights.all_equal()) predicted = build_wetted(dry, *s.trace, s.weights, delta).predicted_energy;
    if (!dir.empty()) {
      fs::create_directories(dir);
      write_field((fs::path(dir) / "field").string(), r.field, c.stencil);
      write_text((fs::path(dir) / "trace.csv").string(), trace_csv(r.trace));
      RunManifest m;
      m.command = "oracle";
      m.instance = cx.opt.instance;
      m.instance_spec = to_json(s);
      m.config = to_json(c);
      m.seed = c.seed;
      m.out = dir;
      m.artifacts = {"field.pgm", "field.json", "trace.csv"};
      write_text((fs::path(dir) / "manifest.json").string(), to_json(m).dump(2) + "\n");
    }
    return sweep_point(r, dry, *s.trace, delta, predicted, c.seed);
  };
  for (std::size_t i = 0; i < cx.opt.deltas.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "delta_%g", cx.opt.deltas[i]);
    const std::string dir = cx.opt.out.empty() ? "" : (fs::path(cx.opt.out) / name).string();
    if (!dir.empty()) cx.manifest.artifacts.push_back(name);
    runs.push_back(std::async(std::launch::async, run_one, cx.opt.deltas[i], dir));
    if (runs.size() - pts.size() >= jobs)
      pts.push_back(runs[pts.size()].get());
  }
  while (pts.size() < runs.size()) pts.push_back(runs[pts.size()].get());
  emit(cx, "summary.csv", sweep_csv(pts));
  VerificationReport rep{"sweep", {check_convergence(pts)}};
  emit(cx, "convergence.json", to_json(rep).dump(2) + "\n");
  cx.out << sweep_csv(pts) << to_text(rep);
  finish(cx);
  return kExitOk;
}

// SVG for one cluster or field document; nullopt for other artifact kinds.
inline std::optional<std::string> svg_of(const fs::path& in) {
  if (in.extension() == ".pgm") return render_svg(read_field(in.string()));
  if (in.extension() != ".json") return std::nullopt;
  const auto doc = parse_json(read_text(in.string()), in.string());
  if (!doc.is_object()) return std::nullopt;
  if (doc.contains("format") && doc["format"] == "pgm-p2")
    return render_svg(read_field(fs::path(in).replace_extension(".pgm").string()));
  if (doc.contains("interfaces") || doc.contains("cluster")) {
    const auto c = cluster_in(doc);
    check_structure(c);
    return render_svg(c);
  }
  return std::nullopt;
}

inline int render(Context& cx) {
  if (cx.opt.input.empty()) throw FormatError("missing --input", "command line");
  const fs::path in(cx.opt.input);
  std::vector<std::pair<fs::path, fs::path>> jobs;  // source, target
  const auto doc = in.extension() == ".json" ? parse_json(read_text(in.string()), in.string()) : Json();
  if (doc.is_object() && doc.contains("command") && doc.contains("artifacts")) {
    // a manifest: every renderable artifact of its directory
    for (const auto& a : doc["artifacts"]) {
      if (!a.is_string()) continue;
      const fs::path src = in.parent_path() / a.get<std::string>();
      const bool field = src.extension() == ".pgm";
      const bool cluster = src.filename() == "network.json" || src.filename() == "wetted.json";
      if (field || cluster) jobs.push_back({src, fs::path(src).replace_extension(".svg")});
    }
    if (jobs.empty()) throw FormatError("manifest lists no cluster or field artifacts", in.string());
  } else {
    jobs.push_back({in, !cx.opt.output.empty() ? fs::path(cx.opt.output) : fs::path(in).replace_extension(".svg")});
  }
  for (const auto& [src, target] : jobs) {
    const auto svg = svg_of(src);
    if (!svg) throw FormatError("not a renderable artifact (cluster, field or manifest expected)", src.string());
    write_text(target.string(), *svg);
    cx.out << "wrote " << target.string() << '\n';
  }
  return kExitOk;
}

}  // namespace cli

// Parses the command line and runs one subcommand.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Weighted planar clusters with a wetting region: dry solver, wetting construction, lattice oracle"};
  app.require_subcommand(1);
  CliOptions o;
  auto common = [&](CLI::App* s, bool oracle) {
    s->add_option("--instance", o.instance, "instance JSON")->required();
    s->add_option("--delta", o.delta, "override the wet area budget");
    s->add_option("--out", o.out, "output directory");
    s->add_option("--max-junctions", o.max_junctions, "interior junction limit for the dry solver");
    if (oracle) {
      s->add_option("--resolution", o.resolution, "cells per unit length");
      s->add_option("--seed", o.seed, "random seed");
      s->add_option("--stencil", o.stencil, "Crofton neighborhood")->check(CLI::IsMember({8, 16}));
      s->add_option("--sweeps", o.sweeps, "annealing sweeps");
      s->add_option("--moves", o.moves, "proposals per active cell and sweep");
      s->add_option("--polish", o.polish, "zero-temperature tie-breaking sweeps");
    }
  };
  auto* dry = app.add_subcommand("solve-dry", "minimal dry network for a ball instance");
  common(dry, false);
  auto* wetc = app.add_subcommand("wet", "wetted cluster built on the dry minimizer");
  common(wetc, false);
  auto* orc = app.add_subcommand("oracle", "lattice annealing oracle");
  common(orc, true);
  auto* ver = app.add_subcommand("verify", "structure checks on a cluster or field");
  common(ver, false);
  ver->add_option("--cluster", o.cluster, "cluster, network or wetted JSON");
  ver->add_option("--field", o.field, "label field .pgm (with .json sidecar)");
  auto* swp = app.add_subcommand("sweep", "oracle runs over a list of wet budgets");
  common(swp, true);
  swp->add_option("--deltas", o.deltas, "wet budgets")->delimiter(',');
  swp->add_option("--jobs", o.jobs, "concurrent runs (0 = hardware threads)");
  auto* ren = app.add_subcommand("render", "SVG from any serialized artifact");
  ren->add_option("--input", o.input, "cluster JSON, field .pgm, field sidecar or run manifest")->required();
  ren->add_option("--output", o.output, "SVG path (default: input with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformed;
  }
  cli::Context cx{o, out, {}};
  try {
    if (*dry) return cli::solve_dry(cx);
    if (*wetc) return cli::wet(cx);
    if (*orc) return cli::oracle(cx);
    if (*ver) return cli::verify(cx);
    if (*swp) return cli::sweep(cx);
    if (*ren) return cli::render(cx);
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const FormatError& e) {
    err << "malformed input: " << e.what() << '\n';
    return kExitMalformed;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitMalformed;
  }
  return kExitMalformed;
}

}  // namespace wetcluster
