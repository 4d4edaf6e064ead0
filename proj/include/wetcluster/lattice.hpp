#pragma once

// Brute-force lattice minimizer. A LabelField assigns every cell a chamber
// label or G; perimeter is the Cauchy-Crofton cut count, so the energy of a
// field is the weighted count of label-differing neighbor pairs inside the
// domain. Search is Metropolis annealing over single-cell relabels, label
// swaps (mass preserving) and G exchanges (wet area preserving), with the
// wet cell count capped at floor(delta / cell^2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wetcluster/crofton.hpp"
#include "wetcluster/model.hpp"

namespace wetcluster {

inline constexpr std::uint8_t kWetCell = 255;

inline std::uint8_t cell_label(int region) {
  if (region == kWet) return kWetCell;
  if (region < 0 || region > 254) throw InvalidInput("region label does not fit a cell");
  return static_cast<std::uint8_t>(region);
}
inline int cell_region(std::uint8_t l) { return l == kWetCell ? kWet : static_cast<int>(l); }

struct LabelField {
  Domain domain = Domain::ball;
  int chambers = 0;
  int resolution = 0;  // cells per unit length
  Point2 origin;       // lower-left corner of cell (0, 0)
  double cell = 0.0;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> labels;  // row-major, labels[j * nx + i]
  std::vector<std::uint8_t> inside;  // domain mask
  std::vector<std::uint8_t> frozen;  // boundary ring (ball) or window frame (plane)

  std::size_t size() const { return labels.size(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  bool in_grid(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  Point2 center(int i, int j) const { return origin + Point2{(i + 0.5) * cell, (j + 0.5) * cell}; }
  Point2 center(std::size_t k) const { return center(static_cast<int>(k % nx), static_cast<int>(k / nx)); }
  double cell_area() const { return cell * cell; }
  std::uint8_t at(int i, int j) const { return labels[index(i, j)]; }

  std::size_t count(int region) const {
    const std::uint8_t l = cell_label(region);
    std::size_t n = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) n += inside[k] && labels[k] == l;
    return n;
  }
  double area(int region) const { return static_cast<double>(count(region)) * cell_area(); }
  double wet_area() const { return area(kWet); }

  friend bool operator==(const LabelField&, const LabelField&) = default;
};

// Empty cells around the domain so that every stencil neighbor of a domain
// cell exists.
inline constexpr int kFieldMargin = 6;
inline constexpr int kTieBreakStencil = 80;

inline double ring_width(int stencil, double cell) {
  return (stencil == 16 ? std::sqrt(5.0) : std::sqrt(2.0)) * cell + 1e-12;
}

// Disk geometry: cells with centers in the open unit disk, a ring as wide as
// the stencil reach frozen; all labels 0.
inline LabelField ball_frame(int chambers, int resolution, int stencil = 16) {
  if (resolution < 64) throw InvalidInput("resolution must be >= 64");
  if (chambers > 254) throw InvalidInput("at most 254 chambers");
  LabelField f;
  f.domain = Domain::ball;
  f.chambers = chambers;
  f.resolution = resolution;
  f.cell = 1.0 / resolution;
  f.nx = f.ny = 2 * resolution + 2 * kFieldMargin;
  f.origin = {-1.0 - kFieldMargin * f.cell, -1.0 - kFieldMargin * f.cell};
  const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny;
  f.labels.assign(n, 0);
  f.inside.assign(n, 0);
  f.frozen.assign(n, 0);
  const double ring = 1.0 - ring_width(stencil, f.cell);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i) {
      const double r = norm(f.center(i, j));
      if (r >= 1.0) continue;
      const std::size_t k = f.index(i, j);
      f.inside[k] = 1;
      f.frozen[k] = r > ring;
    }
  return f;
}

// Disk field with every cell labeled after the boundary arc at its angle;
// the frozen ring thereby agrees with the trace.
inline LabelField ball_field(const BoundaryTrace& h, int chambers, int resolution, int stencil = 16) {
  check_trace(h, chambers);
  LabelField f = ball_frame(chambers, resolution, stencil);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.inside[k]) f.labels[k] = cell_label(h.label_at(angle_of(f.center(k))));
  return f;
}

// Plane window [-1.1, 1.1]^2 with its outermost cells frozen to the exterior.
inline LabelField plane_field(int chambers, int resolution, int stencil = 16) {
  if (resolution < 64) throw InvalidInput("resolution must be >= 64");
  if (chambers > 254) throw InvalidInput("at most 254 chambers");
  LabelField f;
  f.domain = Domain::plane;
  f.chambers = chambers;
  f.resolution = resolution;
  f.cell = 1.0 / resolution;
  const int half = static_cast<int>(std::ceil(1.1 * resolution));
  f.nx = f.ny = 2 * half + 2 * kFieldMargin;
  f.origin = {-(half + kFieldMargin) * f.cell, -(half + kFieldMargin) * f.cell};
  const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny;
  f.labels.assign(n, 0);
  f.inside.assign(n, 0);
  f.frozen.assign(n, 0);
  const int frame = stencil_reach(stencil);
  for (int j = kFieldMargin; j < f.ny - kFieldMargin; ++j)
    for (int i = kFieldMargin; i < f.nx - kFieldMargin; ++i) {
      const std::size_t k = f.index(i, j);
      f.inside[k] = 1;
      const int d = std::min({i - kFieldMargin, j - kFieldMargin, f.nx - kFieldMargin - 1 - i, f.ny - kFieldMargin - 1 - j});
      f.frozen[k] = d < frame;
    }
  return f;
}

// ---------------------------------------------------------------------------
// Perimeter and energy

namespace detail {

struct Offset {
  std::ptrdiff_t dk = 0;
  double weight = 0.0;  // Crofton weight times the cell length
};

// Both orientations of every stencil direction.
inline std::vector<Offset> full_offsets(const LabelField& f, int stencil) {
  std::vector<Offset> out;
  for (const auto& d : crofton_stencil(stencil)) {
    const std::ptrdiff_t dk = static_cast<std::ptrdiff_t>(d.dy) * f.nx + d.dx;
    out.push_back({dk, d.weight * f.cell});
    out.push_back({-dk, d.weight * f.cell});
  }
  return out;
}

inline std::vector<Offset> half_offsets(const LabelField& f, int stencil) {
  std::vector<Offset> out;
  for (const auto& d : crofton_stencil(stencil))
    out.push_back({static_cast<std::ptrdiff_t>(d.dy) * f.nx + d.dx, d.weight * f.cell});
  return out;
}

// Pair cost table indexed by raw cell labels.
inline std::vector<double> pair_costs(const Weights& w) {
  std::vector<double> t(256 * 256, 0.0);
  auto c = [&](int l) { return l == kWetCell ? 0.0 : (l < static_cast<int>(w.c.size()) ? w.c[l] : 0.0); };
  for (int a = 0; a < 256; ++a)
    for (int b = 0; b < 256; ++b) t[a * 256 + b] = a == b ? 0.0 : c(a) + c(b);
  return t;
}

inline void check_field(const LabelField& f) {
  const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny;
  if (f.labels.size() != n || f.inside.size() != n || f.frozen.size() != n || !(f.cell > 0))
    throw InvalidInput("malformed label field");
}

}  // namespace detail

// Crofton length of the boundary of one region relative to the domain.
inline double crofton_perimeter(const LabelField& f, int region, int stencil = 16) {
  detail::check_field(f);
  const std::uint8_t l = cell_label(region);
  const auto offs = detail::half_offsets(f, stencil);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k]) continue;
    for (const auto& o : offs) {
      const std::size_t q = k + o.dk;
      if (!f.inside[q]) continue;
      if ((f.labels[k] == l) != (f.labels[q] == l)) s += o.weight;
    }
  }
  return s;
}

// Sum over chambers of c_l times the relative perimeter; G is unweighted.
inline double lattice_energy(const LabelField& f, const Weights& w, int stencil = 16) {
  detail::check_field(f);
  const auto offs = detail::half_offsets(f, stencil);
  const auto cost = detail::pair_costs(w);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k]) continue;
    for (const auto& o : offs) {
      const std::size_t q = k + o.dk;
      if (f.inside[q]) s += o.weight * cost[f.labels[k] * 256 + f.labels[q]];
    }
  }
  return s;
}

// Every domain cell inside a circular segment of label l carries l.
inline bool segments_contained(const LabelField& f, const BoundaryTrace& h) {
  const auto segs = circular_segments(h);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k]) continue;
    const Point2 c = f.center(k);
    for (const auto& s : segs)
      if (s.contains(c) && f.labels[k] != cell_label(s.label)) return false;
  }
  return true;
}

// Sequentially for l = 1..N: the circular segments of l become l, taken from
// whatever occupied them (other chambers or G).
inline LabelField repair_containment(LabelField f, const BoundaryTrace& h) {
  if (f.domain != Domain::ball) throw InvalidInput("repair_containment needs a ball field");
  detail::check_field(f);
  const auto segs = circular_segments(h);
  for (int l = 1; l <= f.chambers; ++l)
    for (const auto& s : segs) {
      if (s.label != l) continue;
      for (std::size_t k = 0; k < f.size(); ++k)
        if (f.inside[k] && s.contains(f.center(k))) f.labels[k] = cell_label(l);
    }
  return f;
}

// ---------------------------------------------------------------------------
// Annealing

struct OracleConfig {
  int resolution = 256;
  int stencil = 16;
  double t0_cells = 2.0;  // initial temperature in cell lengths of energy
  double cooling = 0.97;
  int sweeps = 400;
  int moves_per_cell = 4;  // proposals per active cell in one sweep
  int polish_sweeps = 50;  // zero-temperature tie-breaking sweeps after annealing
  std::uint64_t seed = 1;
  bool flips = true;
  bool swaps = true;
  bool wet_exchange = true;
};

inline void check_config(const OracleConfig& c) {
  if (c.resolution < 64) throw InvalidInput("resolution must be >= 64");
  if (c.stencil != 8 && c.stencil != 16) throw InvalidInput("stencil must be 8 or 16");
  if (!(c.cooling > 0.0 && c.cooling < 1.0)) throw InvalidInput("cooling must lie in (0, 1)");
  if (c.polish_sweeps < 0) throw InvalidInput("polish_sweeps must be >= 0");
  if (c.moves_per_cell < 1) throw InvalidInput("moves_per_cell must be >= 1");
  if (c.sweeps < 0 || !(c.t0_cells >= 0.0)) throw InvalidInput("schedule must be non-negative");
}

struct TraceRow {
  int sweep = 0;
  double temperature = 0.0;
  double energy = 0.0;  // best so far
  double wet_area = 0.0;
};

struct OracleResult {
  LabelField field;
  double energy = 0.0;
  double initial_energy = 0.0;
  std::size_t wet_cap = 0;
  std::vector<TraceRow> trace;
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;
};

namespace detail {

// Plane start: the cells nearest the origin, split into angular sectors
// holding exactly round(m_l / cell^2) cells each.
inline void seed_plane(LabelField& f, const std::vector<double>& masses) {
  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.inside[k] && !f.frozen[k]) cells.push_back(k);
  std::vector<std::size_t> want;
  std::size_t total = 0;
  for (double m : masses) {
    want.push_back(static_cast<std::size_t>(std::llround(m / f.cell_area())));
    total += want.back();
  }
  if (total > cells.size()) throw Infeasible("masses do not fit the plane window");
  std::stable_sort(cells.begin(), cells.end(),
                   [&](std::size_t a, std::size_t b) { return norm(f.center(a)) < norm(f.center(b)); });
  cells.resize(total);
  std::stable_sort(cells.begin(), cells.end(),
                   [&](std::size_t a, std::size_t b) { return angle_of(f.center(a)) < angle_of(f.center(b)); });
  std::size_t pos = 0;
  for (std::size_t l = 0; l < want.size(); ++l)
    for (std::size_t n = 0; n < want[l]; ++n) f.labels[cells[pos++]] = cell_label(static_cast<int>(l + 1));
}

class Annealer {
 public:
  Annealer(LabelField& f, const Weights& w, int stencil, std::size_t cap, std::uint64_t seed)
      : f_(f), offs_(full_offsets(f, stencil)), fine_(full_offsets(f, kTieBreakStencil)), cost_(pair_costs(w)), cap_(cap),
        rng_(seed), wet_pos_(f.size(), kNone) {
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx || dy) ring8_.push_back(static_cast<std::ptrdiff_t>(dy) * f.nx + dx);
    for (std::size_t k = 0; k < f.size(); ++k)
      if (f.inside[k] && f.labels[k] == kWetCell) add_wet(k);
  }

  std::size_t wet_count() const { return wet_.size(); }

  // Zero-temperature mode that only accepts moves lowering the energy, or
  // keeping it and lowering the finer 80-neighborhood perimeter.
  void set_polish(bool on) { polish_ = on; }
  // Energy change of relabeling cell k to `to`.
  double delta(std::size_t k, std::uint8_t to) const { return delta_with(offs_, k, to); }
  double fine_delta(std::size_t k, std::uint8_t to) const { return polish_ ? delta_with(fine_, k, to) : 0.0; }

  double delta_with(const std::vector<Offset>& offs, std::size_t k, std::uint8_t to) const {
    const std::uint8_t from = f_.labels[k];
    double d = 0.0;
    for (const auto& o : offs) {
      const std::size_t q = k + o.dk;
      if (!f_.inside[q]) continue;
      const std::uint8_t lq = f_.labels[q];
      d += o.weight * (cost_[to * 256 + lq] - cost_[from * 256 + lq]);
    }
    return d;
  }

  void set(std::size_t k, std::uint8_t to) {
    const std::uint8_t from = f_.labels[k];
    if (from == to) return;
    if (from == kWetCell) remove_wet(k);
    f_.labels[k] = to;
    if (to == kWetCell) add_wet(k);
  }

  void collect_active() {
    active_.clear();
    for (std::size_t k = 0; k < f_.size(); ++k) {
      if (!f_.inside[k] || f_.frozen[k]) continue;
      for (auto dk : ring8_) {
        const std::size_t q = k + dk;
        if (f_.inside[q] && f_.labels[q] != f_.labels[k]) {
          active_.push_back(k);
          break;
        }
      }
    }
  }

  std::size_t active_count() const { return active_.size(); }

  // One proposal; returns the accepted energy change (0 when rejected).
  double propose(double temperature, bool flips, bool swaps, bool wet_exchange, std::uint64_t& accepted) {
    if (active_.empty()) return 0.0;
    const double u = unit_(rng_);
    const bool plane = f_.domain == Domain::plane;
    if (wet_exchange && !wet_.empty() && u < 0.3) return wet_move(temperature, accepted);
    if (plane && swaps && (u >= 0.65 || !flips)) return swap_move(temperature, accepted);
    if (!flips) return 0.0;
    const std::size_t k = active_[pick(active_.size())];
    const std::uint8_t from = f_.labels[k];
    // G has no seed of its own, so wetting a cell is proposed directly
    const bool wet = cap_ > 0 && unit_(rng_) < 0.1;
    const std::uint8_t to = wet ? kWetCell : neighbor_label(k);
    if (to == from) return 0.0;
    if (plane && !((from == 0 || from == kWetCell) && (to == 0 || to == kWetCell))) return 0.0;
    if (!plane && to == 0) return 0.0;
    if (to == kWetCell && wet_.size() >= cap_) return 0.0;
    const double d = delta(k, to);
    if (!accept(d, fine_delta(k, to), temperature)) return 0.0;
    set(k, to);
    ++accepted;
    return d;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(unit_(rng_) * n) % n; }

  bool accept(double d, double fine, double t) {
    constexpr double tol = 1e-12;
    if (polish_) return d < -tol || (d <= tol && fine < -tol);
    if (d <= 0.0) return true;
    if (t <= 0.0) return false;
    return unit_(rng_) < std::exp(-d / t);
  }

  // Label of a random in-domain 8-neighbor (possibly the cell's own).
  std::uint8_t neighbor_label(std::size_t k) {
    const std::size_t q = k + ring8_[pick(ring8_.size())];
    return f_.inside[q] ? f_.labels[q] : f_.labels[k];
  }

  bool has_neighbor(std::size_t k, std::uint8_t l) const {
    for (auto dk : ring8_) {
      const std::size_t q = k + dk;
      if (f_.inside[q] && f_.labels[q] == l) return true;
    }
    return false;
  }

  // A cell next to G becomes G while a G cell elsewhere takes a neighboring
  // chamber label; the wet count is unchanged.
  double wet_move(double t, std::uint64_t& accepted) {
    std::size_t a = kNone;
    for (int tries = 0; tries < 32 && a == kNone; ++tries) {
      const std::size_t k = active_[pick(active_.size())];
      if (f_.labels[k] != kWetCell && has_neighbor(k, kWetCell)) a = k;
    }
    std::size_t b = kNone;
    std::uint8_t z = 0;
    for (int tries = 0; tries < 32 && b == kNone; ++tries) {
      const std::size_t k = wet_[pick(wet_.size())];
      if (f_.frozen[k]) continue;
      const std::uint8_t l = neighbor_label(k);
      if (l != kWetCell && !(f_.domain == Domain::ball && l == 0)) {
        b = k;
        z = l;
      }
    }
    if (a == kNone || b == kNone) return 0.0;
    if (f_.domain == Domain::plane && f_.labels[a] != z && !(f_.labels[a] == 0 && z == 0)) {
      // chamber masses are fixed in the plane: the G cell must hand back the same label
      z = f_.labels[a];
      if (!has_neighbor(b, z) && z != 0) return 0.0;
    }
    const std::uint8_t x = f_.labels[a];
    const double d1 = delta(a, kWetCell), e1 = fine_delta(a, kWetCell);
    set(a, kWetCell);
    const double d2 = delta(b, z), e2 = fine_delta(b, z);
    set(b, z);
    const double d = d1 + d2;
    if (accept(d, e1 + e2, t)) {
      ++accepted;
      return d;
    }
    set(b, kWetCell);
    set(a, x);
    return 0.0;
  }

  // Two cells exchange labels x and y (mass preserving).
  double swap_move(double t, std::uint64_t& accepted) {
    const std::size_t a = active_[pick(active_.size())];
    const std::uint8_t x = f_.labels[a];
    const std::uint8_t y = neighbor_label(a);
    if (x == y) return 0.0;
    std::size_t b = kNone;
    for (int tries = 0; tries < 64 && b == kNone; ++tries) {
      const std::size_t k = active_[pick(active_.size())];
      if (k != a && f_.labels[k] == y && has_neighbor(k, x)) b = k;
    }
    if (b == kNone) return 0.0;
    const double d1 = delta(a, y), e1 = fine_delta(a, y);
    set(a, y);
    const double d2 = delta(b, x), e2 = fine_delta(b, x);
    set(b, x);
    const double d = d1 + d2;
    if (accept(d, e1 + e2, t)) {
      ++accepted;
      return d;
    }
    set(b, y);
    set(a, x);
    return 0.0;
  }

  void add_wet(std::size_t k) {
    wet_pos_[k] = wet_.size();
    wet_.push_back(k);
  }
  void remove_wet(std::size_t k) {
    const std::size_t p = wet_pos_[k];
    wet_[p] = wet_.back();
    wet_pos_[wet_[p]] = p;
    wet_.pop_back();
    wet_pos_[k] = kNone;
  }

  LabelField& f_;
  std::vector<Offset> offs_;
  std::vector<Offset> fine_;
  std::vector<double> cost_;
  std::vector<std::ptrdiff_t> ring8_;
  std::size_t cap_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<std::size_t> active_;
  std::vector<std::size_t> wet_;
  std::vector<std::size_t> wet_pos_;
  bool polish_ = false;
};

}  // namespace detail

inline std::size_t wet_cell_cap(double delta, double cell) {
  return static_cast<std::size_t>(std::floor(delta / (cell * cell) + 1e-9));
}

// Annealed lattice minimizer of the instance; deterministic for fixed inputs.
inline OracleResult optimize(const InstanceSpec& spec, const OracleConfig& cfg) {
  check_spec(spec);
  check_config(cfg);
  OracleResult out;
  LabelField f;
  if (spec.domain == Domain::ball) {
    f = repair_containment(ball_field(*spec.trace, spec.chambers(), cfg.resolution, cfg.stencil), *spec.trace);
  } else {
    double total = spec.delta;
    for (double m : *spec.masses) total += m;
    if (total > std::numbers::pi) throw Infeasible("masses and delta exceed the unit disk area");
    f = plane_field(spec.chambers(), cfg.resolution, cfg.stencil);
    detail::seed_plane(f, *spec.masses);
  }
  out.wet_cap = wet_cell_cap(spec.delta, f.cell);
  double current = lattice_energy(f, spec.weights, cfg.stencil);
  out.initial_energy = current;
  LabelField best = f;
  double best_energy = current;
  out.trace.push_back({0, cfg.t0_cells * f.cell, best_energy, best.wet_area()});
  detail::Annealer annealer(f, spec.weights, cfg.stencil, out.wet_cap, cfg.seed);
  double t = cfg.t0_cells * f.cell;
  for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
    annealer.collect_active();
    const std::size_t n = std::max<std::size_t>(annealer.active_count(), 1) * cfg.moves_per_cell;
    for (std::size_t k = 0; k < n; ++k) {
      current += annealer.propose(t, cfg.flips, cfg.swaps, cfg.wet_exchange, out.accepted);
      ++out.proposed;
    }
    if (current < best_energy - 1e-12) {
      // re-evaluate exactly so that drift never promotes a worse field
      current = lattice_energy(f, spec.weights, cfg.stencil);
      if (current < best_energy) {
        best_energy = current;
        best = f;
      }
    }
    out.trace.push_back({sweep, t, best_energy, static_cast<double>(best.count(kWet)) * best.cell_area()});
    t *= cfg.cooling;
  }
  if (cfg.polish_sweeps > 0) {
    f = best;
    detail::Annealer polisher(f, spec.weights, cfg.stencil, out.wet_cap, cfg.seed + 1);
    polisher.set_polish(true);
    for (int sweep = 0; sweep < cfg.polish_sweeps; ++sweep) {
      polisher.collect_active();
      const std::size_t n = std::max<std::size_t>(polisher.active_count(), 1) * cfg.moves_per_cell;
      for (std::size_t k = 0; k < n; ++k) polisher.propose(0.0, cfg.flips, cfg.swaps, cfg.wet_exchange, out.accepted);
    }
    const double e = lattice_energy(f, spec.weights, cfg.stencil);
    if (e <= best_energy + 1e-9) {
      best = f;
      best_energy = std::min(e, best_energy);
    }
    out.trace.push_back({cfg.sweeps + cfg.polish_sweeps, 0.0, best_energy, best.wet_area()});
  }
  out.energy = lattice_energy(best, spec.weights, cfg.stencil);
  out.field = std::move(best);
  return out;
}

}  // namespace wetcluster
