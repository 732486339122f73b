#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "auxgrip/common.hpp"
#include "auxgrip/csv.hpp"

namespace auxgrip {

struct AngleRange {
  double lo_deg = 0.0;
  double hi_deg = 0.0;

  bool contains(double deg) const { return deg >= lo_deg - 1e-9 && deg <= hi_deg + 1e-9; }
  double lerp(double t) const { return lo_deg + t * (hi_deg - lo_deg); }
};

/// Rigid-link geometry of one gripper finger. Lengths in mm, angles in
/// degrees. lambda and nu are part of the published geometry but do not enter
/// the torque relation; they are stored for completeness.
struct MechanismGeometry {
  double l_eg_mm = 42.72;
  double crank_radius_mm = 30.0;  // R
  double l_oc_mm = 128.50;
  double l_de_mm = 59.78;
  double l_fe_mm = 42.73;
  double l_fp_mm = 110.48;
  double l_cd_mm = 40.09;
  double l_fh_mm = 43.08;
  double lambda_deg = 42.0;
  double nu_deg = 14.0;
  double theta2_deg = 30.0;  // angle between adjacent contact normals
  AngleRange phi{0.0, 90.0};
  AngleRange xi{0.0, 90.0};
  AngleRange mu{0.0, 90.0};
  AngleRange eta{-120.0, -90.0};

  void validate() const {
    for (double l : {l_eg_mm, crank_radius_mm, l_oc_mm, l_de_mm, l_fe_mm, l_fp_mm, l_cd_mm,
                     l_fh_mm})
      if (!(l > 0.0)) throw ConfigError("mechanism: all lengths must be positive");
    auto within = [](const AngleRange& r, double lo, double hi) {
      return r.lo_deg >= lo - 1e-9 && r.hi_deg <= hi + 1e-9 && r.lo_deg <= r.hi_deg;
    };
    if (!within(eta, -120.0, -90.0))
      throw ConfigError("mechanism: eta range must lie within [-120, -90] degrees");
    if (!within(phi, 0.0, 90.0) || !within(xi, 0.0, 90.0) || !within(mu, 0.0, 90.0))
      throw ConfigError("mechanism: phi, xi, mu ranges must lie within [0, 90] degrees");
  }
};

struct MechanismState {
  double phi_deg = 0.0;
  double xi_deg = 0.0;
  double eta_deg = -90.0;
  double mu_deg = 0.0;
  double zeta_deg = 0.0;   // not in the published geometry table; default 0
  double theta_deg = 0.0;  // direction of the equivalent tip force
};

struct PortReactions {
  std::array<double, 3> p_n{};         // signed magnitudes along the port normals
  std::array<Vec2, 3> port_xy{};       // finger-frame positions
  std::array<Vec2, 3> normals{};       // unit action lines

  void validate() const {
    for (double p : p_n)
      if (!std::isfinite(p)) throw InputError("port reactions: non-finite force");
    for (const auto& n : normals)
      if (std::abs(n.norm() - 1.0) > 1e-9)
        throw InputError("port reactions: normals must be unit length");
  }
};

struct TipForce {
  double f_k_n = 0.0;
  double theta_deg = 0.0;          // resultant direction relative to the tip normal
  bool theta_defined = false;      // false when the resultant vanishes
  double moment_imbalance_nmm = 0.0;  // couple about the tip point not carried by F_k
};

/// Reduces the three port reactions to a single equivalent force at the
/// fingertip. The residual couple about the tip is reported as a diagnostic
/// rather than silently dropped.
inline TipForce equivalent_tip_force(const PortReactions& r, Vec2 tip_point, Vec2 tip_normal) {
  r.validate();
  if (std::abs(tip_normal.norm() - 1.0) > 1e-9)
    throw InputError("equivalent_tip_force: tip normal must be unit length");
  Vec2 resultant{0, 0};
  double moment = 0.0;
  for (int i = 0; i < 3; ++i) {
    resultant += r.p_n[i] * r.normals[i];
    moment += r.p_n[i] * (r.port_xy[i] - tip_point).cross(r.normals[i]);
  }
  TipForce out;
  out.f_k_n = resultant.norm();
  out.moment_imbalance_nmm = moment;
  if (out.f_k_n > 1e-14) {
    out.theta_defined = true;
    out.theta_deg = rad2deg(std::atan2(tip_normal.cross(resultant), tip_normal.dot(resultant)));
  }
  return out;
}

/// Servo torque balancing an equivalent tip force F_k:
///   tau = F_k R sin(phi) [ L_FP sin(mu - theta) cos(zeta) / (L_FE sin(eta + xi)) - cos(theta) ]
inline double required_torque(const MechanismState& s, const MechanismGeometry& g, double f_k_n) {
  const double sum = deg2rad(s.eta_deg + s.xi_deg);
  const double dist_to_singular = std::abs(std::remainder(sum, kPi));
  if (dist_to_singular < 1e-6)
    throw SingularityError("required_torque: sin(eta + xi) vanishes (eta = " +
                           std::to_string(s.eta_deg) + " deg, xi = " + std::to_string(s.xi_deg) +
                           " deg)");
  const double phi = deg2rad(s.phi_deg);
  const double theta = deg2rad(s.theta_deg);
  const double mu = deg2rad(s.mu_deg);
  const double zeta = deg2rad(s.zeta_deg);
  const double ratio = g.l_fp_mm * std::sin(mu - theta) * std::cos(zeta) /
                       (g.l_fe_mm * std::sin(sum));
  return f_k_n * g.crank_radius_mm * std::sin(phi) * (ratio - std::cos(theta));
}

/// Linear crank-angle schedule: maps a crank angle interval onto the
/// geometry's published angle ranges. The kinematic closure of the real
/// linkage is not published; this map is the documented stand-in and can be
/// replaced wholesale through configuration.
struct CrankSchedule {
  double crank_lo_deg = 0.0;
  double crank_hi_deg = 90.0;
  double zeta_deg = 0.0;

  MechanismState state_at(double crank_deg, const MechanismGeometry& g) const {
    if (crank_deg < crank_lo_deg - 1e-9 || crank_deg > crank_hi_deg + 1e-9)
      throw InputError("crank schedule: angle " + std::to_string(crank_deg) +
                       " deg outside [" + std::to_string(crank_lo_deg) + ", " +
                       std::to_string(crank_hi_deg) + "]");
    const double t = (crank_hi_deg > crank_lo_deg)
                         ? (crank_deg - crank_lo_deg) / (crank_hi_deg - crank_lo_deg)
                         : 0.0;
    MechanismState s;
    s.phi_deg = g.phi.lerp(t);
    s.xi_deg = g.xi.lerp(t);
    s.mu_deg = g.mu.lerp(t);
    // eta sweeps its range downward: eta + xi then stays in [-90, -30] deg
    // and never crosses the sin(eta + xi) = 0 singularity
    s.eta_deg = g.eta.lerp(1.0 - t);
    s.zeta_deg = zeta_deg;
    return s;
  }
};

struct ReactionSample {
  double crank_deg = 0.0;
  double grasp_n = 0.0;  // grasping (contact) force associated with the sample
  PortReactions reactions;
  Vec2 tip_point{0, 0};
  Vec2 tip_normal{0, 1};
};

struct TorquePoint {
  double grasp_n = 0.0;
  double tau_nmm = 0.0;
  double tau_total_nmm = 0.0;  // six fingers
};

inline std::vector<TorquePoint> torque_curve(const std::vector<ReactionSample>& samples,
                                             const MechanismGeometry& geometry,
                                             const CrankSchedule& schedule) {
  geometry.validate();
  std::vector<TorquePoint> out;
  out.reserve(samples.size());
  for (const auto& smp : samples) {
    MechanismState state = schedule.state_at(smp.crank_deg, geometry);
    const TipForce tip = equivalent_tip_force(smp.reactions, smp.tip_point, smp.tip_normal);
    if (tip.theta_defined) state.theta_deg = tip.theta_deg;
    const double tau = required_torque(state, geometry, tip.f_k_n);
    out.push_back({smp.grasp_n, tau, 6.0 * tau});
  }
  return out;
}

inline void torque_curve_to_csv(const std::vector<TorquePoint>& curve, std::ostream& out) {
  csv::Writer w(out);
  w.row({"grasp_N", "tau_Nmm", "tau_total_Nmm"});
  for (const auto& p : curve) w.numeric_row({p.grasp_n, p.tau_nmm, p.tau_total_nmm});
}

}  // namespace auxgrip
