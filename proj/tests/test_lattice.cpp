#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wetcluster/dry_solver.hpp"
#include "wetcluster/lattice.hpp"
#include "wetcluster/measure.hpp"

using namespace wetcluster;
using std::numbers::pi;

namespace {

BoundaryTrace y_trace() { return {{{pi / 2, 1}, {7 * pi / 6, 2}, {11 * pi / 6, 3}}}; }

InstanceSpec ball_spec(BoundaryTrace h, int chambers, double delta) {
  InstanceSpec s;
  s.weights = equal_weights(chambers);
  s.delta = delta;
  s.trace = std::move(h);
  return s;
}

template <class Pred>
void paint(LabelField& f, int region, Pred in) {
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.inside[k] && !f.frozen[k] && in(f.center(k))) f.labels[k] = cell_label(region);
}

}  // namespace

TEST(CroftonStencil, ExtendedNeighborhoodsStayUnbiased) {
  for (int s : {8, 16, 32, 48, 80}) {
    const auto dirs = crofton_stencil(s);
    EXPECT_EQ(static_cast<int>(dirs.size()), s / 2);
    double mean = 0.0;
    const int n = 3600;
    for (int i = 0; i < n; ++i) mean += crofton_line_factor(s, pi * (i + 0.5) / n);
    EXPECT_NEAR(mean / n, 1.0, 1e-6) << s;
  }
  EXPECT_THROW(crofton_stencil(12), InvalidInput);
}

TEST(CroftonPerimeter, SquareDiskAndEmpty) {
  auto f = plane_field(1, 256);
  EXPECT_EQ(crofton_perimeter(f, 1), 0.0);
  paint(f, 1, [](Point2 p) { return std::abs(p.x) < 0.25 && std::abs(p.y) < 0.25; });
  EXPECT_NEAR(crofton_perimeter(f, 1), 2.0, 0.02 * 2.0);
  f = plane_field(1, 256);
  paint(f, 1, [](Point2 p) { return norm(p) < 0.5; });
  EXPECT_NEAR(crofton_perimeter(f, 1), pi, 0.02 * pi);
}

TEST(LatticeEnergy, DiameterSplitAndSingleChamber) {
  const BoundaryTrace chord{{{0.0, 1}, {pi, 2}}};
  const auto f = ball_field(chord, 2, 256);
  EXPECT_NEAR(lattice_energy(f, equal_weights(2)), 4.0, 0.02 * 4.0);
  const auto one = ball_field(BoundaryTrace{{{0.0, 1}}}, 1, 128);
  EXPECT_EQ(lattice_energy(one, equal_weights(1)), 0.0);
}

TEST(LatticeEnergy, RasterizedDryY) {
  const auto h = y_trace();
  const auto dry = best_dry(ball_spec(h, 3, 0.0)).best.front();
  const auto f = rasterize_cluster(network_cluster(dry, h, 3), ball_field(h, 3, 256));
  EXPECT_NEAR(lattice_energy(f, equal_weights(3)), 6.0, 0.02 * 6.0);
}

TEST(LatticeEnergy, WetCellsCarryNoWeight) {
  // a wet blob inside chamber 1 costs c_1 per unit of its boundary
  auto f = ball_field(BoundaryTrace{{{0.0, 1}}}, 1, 256);
  paint(f, kWet, [](Point2 p) { return norm(p) < 0.2; });
  const Weights w{{1.0, 2.0}};
  EXPECT_NEAR(lattice_energy(f, w), 2.0 * crofton_perimeter(f, kWet), 1e-9);
}

TEST(BallField, RingMatchesTrace) {
  const auto h = y_trace();
  const auto f = ball_field(h, 3, 128);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!f.inside[k]) {
      EXPECT_EQ(f.labels[k], 0);
      continue;
    }
    if (f.frozen[k]) EXPECT_EQ(f.labels[k], cell_label(h.label_at(angle_of(f.center(k)))));
  }
}

TEST(Repair, AlreadyContainedIsUnchanged) {
  const auto h = y_trace();
  const auto f = ball_field(h, 3, 128);
  ASSERT_TRUE(segments_contained(f, h));
  EXPECT_EQ(repair_containment(f, h), f);
}

TEST(Repair, ForeignBlobIsOverwritten) {
  const auto h = y_trace();
  auto f = ball_field(h, 3, 256);
  // the segment of chamber 1 spans angles pi/2..7pi/6 beyond the chord at distance 1/2
  const Point2 c = polar(0.85, 5 * pi / 6);
  paint(f, 2, [&](Point2 p) { return norm(p - c) < 0.05; });
  ASSERT_FALSE(segments_contained(f, h));
  const double before = lattice_energy(f, equal_weights(3));
  const auto g = repair_containment(f, h);
  EXPECT_TRUE(segments_contained(g, h));
  EXPECT_LT(lattice_energy(g, equal_weights(3)), before);
  EXPECT_EQ(g, ball_field(h, 3, 256));
}

TEST(Repair, RandomFieldsGainAtMostOneCellLength) {
  const auto h = y_trace();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  const auto base = ball_field(h, 3, 96);
  for (int trial = 0; trial < 60; ++trial) {
    auto f = base;
    for (int b = 0; b < 6; ++b) {
      const Point2 c = polar(std::sqrt(u(rng)), 2 * pi * u(rng));
      const double r = 0.05 + 0.25 * u(rng);
      const int l = 1 + static_cast<int>(u(rng) * 3) % 3;
      paint(f, l, [&](Point2 p) { return norm(p - c) < r; });
    }
    const double before = lattice_energy(f, equal_weights(3));
    const auto g = repair_containment(f, h);
    EXPECT_TRUE(segments_contained(g, h));
    EXPECT_LE(lattice_energy(g, equal_weights(3)), before + f.cell + 1e-12);
  }
}

TEST(Repair, RejectsPlaneField) {
  EXPECT_THROW(repair_containment(plane_field(2, 64), y_trace()), InvalidInput);
}

TEST(Oracle, ConfigValidation) {
  OracleConfig c;
  EXPECT_NO_THROW(check_config(c));
  c.resolution = 32;
  EXPECT_THROW(check_config(c), InvalidInput);
  c = {};
  c.cooling = 1.0;
  EXPECT_THROW(check_config(c), InvalidInput);
  c = {};
  c.stencil = 32;
  EXPECT_THROW(check_config(c), InvalidInput);
}

TEST(Oracle, DeterministicAndMonotoneTrace) {
  const auto s = ball_spec(y_trace(), 3, 0.01);
  OracleConfig c;
  c.resolution = 64;
  c.sweeps = 60;
  c.polish_sweeps = 5;
  const auto a = optimize(s, c);
  const auto b = optimize(s, c);
  EXPECT_EQ(a.field, b.field);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_LE(a.energy, a.initial_energy + 1e-12);
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i].energy, a.trace[i - 1].energy + 1e-12);
  EXPECT_LE(static_cast<double>(a.field.count(kWet)), static_cast<double>(a.wet_cap));
  EXPECT_TRUE(segments_contained(a.field, *s.trace));
  c.seed = 2;
  EXPECT_NE(optimize(s, c).field, a.field);
}

TEST(Oracle, DryYAtModerateResolution) {
  OracleConfig c;
  c.resolution = 128;
  const auto r = optimize(ball_spec(y_trace(), 3, 0.0), c);
  EXPECT_NEAR(r.energy, 6.0, 0.03 * 6.0);
  EXPECT_EQ(r.field.count(kWet), 0u);
}

TEST(Oracle, PlaneDomainKeepsMasses) {
  InstanceSpec s;
  s.domain = Domain::plane;
  s.weights = equal_weights(2);
  s.masses = std::vector<double>{0.2, 0.2};
  OracleConfig c;
  c.resolution = 64;
  c.sweeps = 40;
  c.polish_sweeps = 0;
  const auto r = optimize(s, c);
  const double cell2 = r.field.cell_area();
  EXPECT_NEAR(r.field.area(1), 0.2, cell2);
  EXPECT_NEAR(r.field.area(2), 0.2, cell2);
  // two separate disks, each interface costing c_0 + c_l = 2, is beaten
  EXPECT_LT(r.energy, 2 * 2 * 2 * std::sqrt(pi * 0.2));
}

TEST(Oracle, InfeasibleWetArea) {
  InstanceSpec s;
  s.domain = Domain::plane;
  s.weights = equal_weights(1);
  s.masses = std::vector<double>{3.0};
  s.delta = 0.5;
  EXPECT_THROW(optimize(s, OracleConfig{}), Infeasible);
}
