#include <gtest/gtest.h>

#include <sstream>

#include "auxgrip/mechanism.hpp"

using namespace auxgrip;

namespace {

MechanismState reference_state() {
  // phi = 90, theta = 0, mu = 90, zeta = 0, eta + xi = 90
  MechanismState s;
  s.phi_deg = 90.0;
  s.theta_deg = 0.0;
  s.mu_deg = 90.0;
  s.zeta_deg = 0.0;
  s.eta_deg = 0.0;
  s.xi_deg = 90.0;
  return s;
}

}  // namespace

TEST(Geometry, DefaultsAreThePublishedLinkTable) {
  MechanismGeometry g;
  EXPECT_DOUBLE_EQ(g.l_eg_mm, 42.72);
  EXPECT_DOUBLE_EQ(g.crank_radius_mm, 30.0);
  EXPECT_DOUBLE_EQ(g.l_oc_mm, 128.50);
  EXPECT_DOUBLE_EQ(g.l_de_mm, 59.78);
  EXPECT_DOUBLE_EQ(g.l_fe_mm, 42.73);
  EXPECT_DOUBLE_EQ(g.l_fp_mm, 110.48);
  EXPECT_DOUBLE_EQ(g.l_cd_mm, 40.09);
  EXPECT_DOUBLE_EQ(g.l_fh_mm, 43.08);
  EXPECT_DOUBLE_EQ(g.lambda_deg, 42.0);
  EXPECT_DOUBLE_EQ(g.nu_deg, 14.0);
  EXPECT_NO_THROW(g.validate());
}

TEST(Geometry, Validation) {
  MechanismGeometry g;
  g.l_fe_mm = -1.0;
  EXPECT_THROW(g.validate(), ConfigError);
  g = MechanismGeometry{};
  g.eta = {-150.0, -90.0};
  EXPECT_THROW(g.validate(), ConfigError);
  g = MechanismGeometry{};
  g.phi = {10.0, 100.0};
  EXPECT_THROW(g.validate(), ConfigError);
}

// ==========================================================
// Torque relation
// ==========================================================

TEST(Torque, ReferenceEvaluationPoint) {
  const MechanismGeometry g;
  const double tau = required_torque(reference_state(), g, 1.0);
  // 30 * (110.48 / 42.73 - 1)
  EXPECT_NEAR(tau, 47.57, 0.01);
}

TEST(Torque, ZeroCrankAngleGivesZeroTorque) {
  MechanismState s = reference_state();
  s.phi_deg = 0.0;
  EXPECT_DOUBLE_EQ(required_torque(s, MechanismGeometry{}, 3.7), 0.0);
}

TEST(Torque, ZeroForceGivesZeroTorque) {
  EXPECT_DOUBLE_EQ(required_torque(reference_state(), MechanismGeometry{}, 0.0), 0.0);
}

TEST(Torque, ExactLinearityInForce) {
  const MechanismGeometry g;
  MechanismState s = reference_state();
  s.phi_deg = 55.0;
  s.theta_deg = 12.0;
  s.mu_deg = 70.0;
  s.eta_deg = -100.0;
  s.xi_deg = 40.0;
  for (double f : {0.2, 1.0, 3.7}) {
    const double t1 = required_torque(s, g, f);
    const double t2 = required_torque(s, g, 2.0 * f);
    EXPECT_LE(std::abs(t2 - 2.0 * t1), 1e-12 * std::abs(t2));
  }
}

TEST(Torque, SingularityGuard) {
  const MechanismGeometry g;
  MechanismState s = reference_state();
  s.eta_deg = -90.0;
  s.xi_deg = 90.0;  // eta + xi = 0
  EXPECT_THROW(required_torque(s, g, 1.0), SingularityError);
  s.xi_deg = 90.0 + rad2deg(5e-7);  // within 1e-6 rad of the singularity
  EXPECT_THROW(required_torque(s, g, 1.0), SingularityError);
  s.xi_deg = 90.0 + rad2deg(5e-6);  // outside the guard band
  EXPECT_NO_THROW(required_torque(s, g, 1.0));
  // sin(eta+xi) also vanishes at 180 degrees
  s.eta_deg = 90.0;
  s.xi_deg = 90.0;
  EXPECT_THROW(required_torque(s, g, 1.0), SingularityError);
}

TEST(Torque, ContinuousInPhi) {
  const MechanismGeometry g;
  MechanismState s = reference_state();
  double prev = 0.0;
  bool first = true;
  for (double phi = 0.0; phi <= 90.0; phi += 0.25) {
    s.phi_deg = phi;
    const double tau = required_torque(s, g, 1.0);
    if (!first) EXPECT_LE(std::abs(tau - prev), 0.5);
    prev = tau;
    first = false;
  }
}

// ==========================================================
// Equivalent tip force
// ==========================================================

namespace {

PortReactions simple_reactions(std::array<double, 3> p, std::array<Vec2, 3> normals) {
  PortReactions r;
  r.p_n = p;
  r.normals = normals;
  r.port_xy = {Vec2{0, 0}, Vec2{10, 0}, Vec2{20, 0}};
  return r;
}

}  // namespace

TEST(TipForce, AllZeroReactionsFlagThetaUndefined) {
  const auto r = simple_reactions({0, 0, 0}, {Vec2{0, 1}, Vec2{0, 1}, Vec2{0, 1}});
  const auto tip = equivalent_tip_force(r, {10, 5}, {0, 1});
  EXPECT_DOUBLE_EQ(tip.f_k_n, 0.0);
  EXPECT_FALSE(tip.theta_defined);
}

TEST(TipForce, SinglePortAlongTipNormal) {
  const auto r = simple_reactions({1, 0, 0}, {Vec2{0, 1}, Vec2{0, 1}, Vec2{0, 1}});
  const auto tip = equivalent_tip_force(r, {0, 0}, {0, 1});
  EXPECT_NEAR(tip.f_k_n, 1.0, 1e-15);
  EXPECT_NEAR(tip.theta_deg, 0.0, 1e-12);
  EXPECT_TRUE(tip.theta_defined);
}

TEST(TipForce, SymmetricPairBisectsOnTipNormal) {
  const double mag = 0.7;
  const Vec2 n1 = Vec2{std::sin(deg2rad(30.0)), std::cos(deg2rad(30.0))};
  const Vec2 n2 = Vec2{-std::sin(deg2rad(30.0)), std::cos(deg2rad(30.0))};
  const auto r = simple_reactions({mag, mag, 0}, {n1, n2, Vec2{0, 1}});
  const auto tip = equivalent_tip_force(r, {10, 0}, {0, 1});
  EXPECT_NEAR(tip.theta_deg, 0.0, 1e-12);
  EXPECT_NEAR(tip.f_k_n, 2.0 * mag * std::cos(deg2rad(30.0)), 1e-12);
}

TEST(TipForce, RotationEquivariance) {
  PortReactions r = simple_reactions({0.4, 1.1, 0.6},
                                     {Vec2{0, 1}, Vec2{0.6, 0.8}, Vec2{-0.28, 0.96}});
  const Vec2 tip_n{0.1, 1.0};
  const auto base = equivalent_tip_force(r, {5, 2}, tip_n.normalized());
  const double beta = deg2rad(73.0);
  PortReactions rot = r;
  for (int i = 0; i < 3; ++i) rot.normals[i] = r.normals[i].rotated(beta);
  const auto turned = equivalent_tip_force(rot, {5, 2}, tip_n.normalized().rotated(beta));
  EXPECT_NEAR(turned.f_k_n, base.f_k_n, 1e-12);
  EXPECT_NEAR(turned.theta_deg, base.theta_deg, 1e-9);
}

TEST(TipForce, MomentImbalanceDiagnostic) {
  // 1 N upward at x = 0, tip at x = 10: couple = 1 * (-10) about the tip
  const auto r = simple_reactions({1, 0, 0}, {Vec2{0, 1}, Vec2{0, 1}, Vec2{0, 1}});
  const auto tip = equivalent_tip_force(r, {10, 0}, {0, 1});
  EXPECT_NEAR(tip.moment_imbalance_nmm, -10.0, 1e-12);
}

TEST(TipForce, RejectsNonUnitNormals) {
  auto r = simple_reactions({1, 0, 0}, {Vec2{0, 2}, Vec2{0, 1}, Vec2{0, 1}});
  EXPECT_THROW(equivalent_tip_force(r, {0, 0}, {0, 1}), InputError);
}

// ==========================================================
// Torque curves
// ==========================================================

namespace {

std::vector<ReactionSample> proportional_history(double scale) {
  std::vector<ReactionSample> out;
  for (int i = 0; i <= 10; ++i) {
    ReactionSample s;
    s.crank_deg = 9.0 * i;
    s.grasp_n = scale * 0.08 * i;
    s.tip_point = {0, 0};
    s.tip_normal = {0, 1};
    s.reactions.p_n = {scale * 0.01 * i, scale * 0.02 * i, scale * 0.03 * i};
    s.reactions.normals = {Vec2{0, 1}, Vec2{0.6, 0.8}, Vec2{-0.6, 0.8}};
    s.reactions.port_xy = {Vec2{-5, -2}, Vec2{0, -3}, Vec2{5, -2}};
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(TorqueCurve, ZeroHistoryGivesZeroCurve) {
  const auto curve = torque_curve(proportional_history(0.0), MechanismGeometry{}, CrankSchedule{});
  for (const auto& p : curve) {
    EXPECT_DOUBLE_EQ(p.grasp_n, 0.0);
    EXPECT_DOUBLE_EQ(p.tau_nmm, 0.0);
    EXPECT_DOUBLE_EQ(p.tau_total_nmm, 0.0);
  }
}

TEST(TorqueCurve, ScalingReactionsScalesTorque) {
  const auto c1 = torque_curve(proportional_history(1.0), MechanismGeometry{}, CrankSchedule{});
  const auto c2 = torque_curve(proportional_history(2.0), MechanismGeometry{}, CrankSchedule{});
  ASSERT_EQ(c1.size(), c2.size());
  for (size_t i = 0; i < c1.size(); ++i) {
    EXPECT_NEAR(c2[i].tau_nmm, 2.0 * c1[i].tau_nmm, 1e-12 * std::max(1.0, std::abs(c2[i].tau_nmm)));
    EXPECT_DOUBLE_EQ(c2[i].tau_total_nmm, 6.0 * c2[i].tau_nmm);
  }
}

TEST(TorqueCurve, ScheduleGapIsAnError) {
  auto hist = proportional_history(1.0);
  hist.back().crank_deg = 120.0;  // outside the 0..90 schedule
  EXPECT_THROW(torque_curve(hist, MechanismGeometry{}, CrankSchedule{}), InputError);
}

TEST(TorqueCurve, CsvHeader) {
  const auto curve = torque_curve(proportional_history(1.0), MechanismGeometry{}, CrankSchedule{});
  std::ostringstream os;
  torque_curve_to_csv(curve, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "grasp_N,tau_Nmm,tau_total_Nmm");
}

TEST(Schedule, LinearMapCoversThePublishedRanges) {
  const MechanismGeometry g;
  const CrankSchedule sched;
  const auto lo = sched.state_at(0.0, g);
  const auto hi = sched.state_at(90.0, g);
  EXPECT_DOUBLE_EQ(lo.phi_deg, 0.0);
  EXPECT_DOUBLE_EQ(hi.phi_deg, 90.0);
  EXPECT_DOUBLE_EQ(lo.eta_deg, -90.0);
  EXPECT_DOUBLE_EQ(hi.eta_deg, -120.0);
  // the default schedule never approaches the sin(eta + xi) singularity
  for (double c = 0.0; c <= 90.0; c += 1.0) {
    const auto s = sched.state_at(c, g);
    EXPECT_LE(std::sin(deg2rad(s.eta_deg + s.xi_deg)), -0.49);
  }
  EXPECT_THROW(sched.state_at(-5.0, g), InputError);
}
