#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wetcluster/verify.hpp"

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

struct Fixture {
  InstanceSpec spec = ball_spec(y_trace(), 3, 0.01);
  JunctionNetwork dry = best_dry(ball_spec(y_trace(), 3, 0.0)).best.front();
  WettedCluster wet = build_wetted(dry, y_trace(), equal_weights(3), 0.01);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

CheckStatus status(const VerificationReport& r, const std::string& name) {
  const auto* c = r.find(name);
  return c ? c->status : CheckStatus::skipped;
}

double value(const CheckEntry& c, const std::string& name) {
  for (const auto& m : c.values)
    if (m.name == name) return m.value;
  ADD_FAILURE() << "missing value " << name;
  return 0.0;
}

}  // namespace

TEST(VerifyCluster, WettedYPassesEverything) {
  const auto& fx = fixture();
  const auto r = verify_cluster(fx.wet.cluster, fx.spec, &fx.dry);
  EXPECT_TRUE(r.passed()) << to_text(r);
  for (const auto& c : r.checks) EXPECT_EQ(c.status, CheckStatus::pass) << c.name;
  EXPECT_LT(value(*r.find("curvature_condition"), "spread"), 1e-12);
  EXPECT_EQ(value(*r.find("cusp_tangency"), "cusps"), 3.0);
}

TEST(VerifyCluster, DryClusterSkipsWetChecks) {
  const auto& fx = fixture();
  const auto c = network_cluster(fx.dry, y_trace(), 3);
  const auto r = verify_cluster(c, ball_spec(y_trace(), 3, 0.0), &fx.dry);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(status(r, "curvature_condition"), CheckStatus::skipped);
  EXPECT_EQ(status(r, "cusp_tangency"), CheckStatus::skipped);
  EXPECT_EQ(status(r, "convexity"), CheckStatus::pass);
}

TEST(VerifyCluster, RotatedSegmentFailsTangency) {
  auto c = fixture().wet.cluster;
  const auto& j = *std::find_if(c.junctions.begin(), c.junctions.end(),
                                [](const auto& j) { return j.kind == JunctionKind::interior_cusp; });
  for (int id : j.interfaces) {
    auto& f = c.interfaces[static_cast<std::size_t>(id)];
    if (f.left == kWet || f.right == kWet) continue;
    auto& a = f.chain.arcs.front();
    if (distance(a.start, j.at) < 1e-9) a.end = a.start + rotate(a.end - a.start, 0.01);
    else a.start = a.end + rotate(a.start - a.end, 0.01);
  }
  const auto e = check_cusp_tangency(c);
  EXPECT_EQ(e.status, CheckStatus::fail);
  EXPECT_NEAR(value(e, "max_angle_rad"), 0.01, 1e-9);
}

TEST(VerifyCluster, FlippedArcFailsConvexityAndCurvature) {
  auto c = fixture().wet.cluster;
  for (auto& f : c.interfaces)
    if (f.left == kWet) {
      f.chain.arcs.front().curvature *= -1;
      break;
    }
  EXPECT_EQ(check_convexity(c).status, CheckStatus::fail);
  EXPECT_EQ(check_curvature_condition(c, equal_weights(3)).status, CheckStatus::fail);
}

TEST(VerifyField, RasterizedWettedYPasses) {
  const auto& fx = fixture();
  const auto f = rasterize_cluster(fx.wet.cluster, ball_field(y_trace(), 3, 256));
  auto ref = wetted_reference(fx.wet);
  ref.delta = f.wet_area();  // the raster has no exact budget
  const auto r = verify_field(f, equal_weights(3), ref);
  for (const auto& c : r.checks)
    EXPECT_NE(c.status, CheckStatus::fail) << to_text(r);
  EXPECT_EQ(status(r, "infiltration_probe"), CheckStatus::info);
  EXPECT_NEAR(value(*r.find("curvature_condition"), "expected_kappa"), 1 / 0.249024, 1e-4);
}

TEST(VerifyField, Saturation) {
  auto f = ball_field(y_trace(), 3, 128);
  EXPECT_EQ(check_saturation(f, 0.0, true).status, CheckStatus::pass);
  EXPECT_EQ(check_saturation(f, 0.01, false).status, CheckStatus::pass);
  EXPECT_EQ(check_saturation(f, 0.01, true).status, CheckStatus::fail);
  const std::size_t cap = wet_cell_cap(0.01, f.cell);
  std::size_t n = 0;
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.inside[k]) order.push_back(k);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return norm(f.center(a)) < norm(f.center(b)); });
  for (auto k : order) {
    if (n++ == cap) break;
    f.labels[k] = kWetCell;
  }
  EXPECT_EQ(check_saturation(f, 0.01, true).status, CheckStatus::pass);
  EXPECT_EQ(check_saturation(f, 0.01, false).status, CheckStatus::fail);
}

TEST(VerifyField, NonConvexBlobFails) {
  auto f = ball_field(y_trace(), 3, 128);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.inside[k] && !f.frozen[k] && norm(f.center(k) - Point2{0.0, 0.5}) < 0.2) f.labels[k] = cell_label(2);
  EXPECT_EQ(check_convexity(f).status, CheckStatus::fail);
}

TEST(Convergence, SqrtScalingPasses) {
  std::vector<SweepPoint> pts;
  for (double d : {0.04, 0.02, 0.01, 0.005}) {
    SweepPoint p;
    p.delta = d;
    p.cell = 1.0 / 256;
    p.hausdorff_chambers = 0.4 * std::sqrt(d);
    p.hausdorff_G_sigma = 0.3 * std::sqrt(d);
    p.energy_oracle = 6.0 - 0.8 * std::sqrt(d);
    pts.push_back(p);
  }
  auto e = check_convergence(pts);
  EXPECT_EQ(e.status, CheckStatus::pass);
  EXPECT_NEAR(value(e, "exponent_chambers"), 0.5, 1e-12);

  pts[3].converged = false;
  pts[3].hausdorff_chambers = 1.0;
  EXPECT_EQ(check_convergence(pts).status, CheckStatus::pass);
  pts[2].converged = false;
  EXPECT_EQ(check_convergence(pts).status, CheckStatus::skipped);
}

TEST(Convergence, RisingEnergyOrLinearScalingFails) {
  std::vector<SweepPoint> pts;
  for (double d : {0.04, 0.02, 0.01, 0.005}) {
    SweepPoint p;
    p.delta = d;
    p.cell = 1.0 / 256;
    p.hausdorff_chambers = p.hausdorff_G_sigma = 3 * d;
    p.energy_oracle = 6.0;
    pts.push_back(p);
  }
  EXPECT_EQ(check_convergence(pts).status, CheckStatus::fail);
  for (auto& p : pts) p.hausdorff_chambers = p.hausdorff_G_sigma = std::sqrt(p.delta);
  EXPECT_EQ(check_convergence(pts).status, CheckStatus::pass);
  pts[0].energy_oracle = 6.1;
  EXPECT_EQ(check_convergence(pts).status, CheckStatus::fail);
}

TEST(Report, JsonAndText) {
  const auto& fx = fixture();
  const auto r = verify_cluster(fx.wet.cluster, fx.spec, &fx.dry);
  const auto j = to_json(r);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["checks"].size(), r.checks.size());
  EXPECT_EQ(j["checks"][0]["status"], "pass");
  EXPECT_NE(to_text(r).find("PASSED"), std::string::npos);
  // reproducible numbers
  EXPECT_EQ(to_json(verify_cluster(fx.wet.cluster, fx.spec, &fx.dry)).dump(), j.dump());
}
