#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "auxgrip/contact.hpp"
#include "auxgrip/fem.hpp"
#include "auxgrip/lattice.hpp"
#include "auxgrip/mechanism.hpp"

namespace auxgrip {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline UnitCellSpec unit_cell_from_json(const json& j) {
  UnitCellSpec c;
  c.strut_h_mm = j.value("strut_h_mm", c.strut_h_mm);
  c.strut_d_mm = j.value("strut_d_mm", c.strut_d_mm);
  c.reentrant_angle_deg = j.value("reentrant_angle_deg", c.reentrant_angle_deg);
  c.wall_thickness_mm = j.value("wall_thickness_mm", c.wall_thickness_mm);
  c.depth_mm = j.value("depth_mm", c.depth_mm);
  return c;
}

inline LatticeSpec lattice_spec_from_json(const json& j) {
  LatticeSpec s;
  if (j.contains("cell")) s.cell = unit_cell_from_json(j.at("cell"));
  s.rows = j.value("rows", s.rows);
  s.cols = j.value("cols", s.cols);
  s.inclination_deg = j.value("inclination_deg", s.inclination_deg);
  s.backbone_arch_radius_mm = j.value("backbone_arch_radius_mm", s.backbone_arch_radius_mm);
  if (j.contains("port_positions")) {
    const auto& pp = j.at("port_positions");
    if (!pp.is_array() || pp.size() != 3)
      throw ConfigError("config: port_positions must be an array of 3 fractions");
    for (int i = 0; i < 3; ++i) s.port_positions[i] = pp[i].get<double>();
  }
  return s;
}

inline Material material_from_json(const json& j) {
  Material m;
  m.youngs_modulus_mpa = j.value("youngs_modulus_mpa", m.youngs_modulus_mpa);
  m.poisson_ratio = j.value("poisson_ratio", m.poisson_ratio);
  return m;
}

inline SolveSettings solve_settings_from_json(const json& j) {
  SolveSettings s;
  s.min_substeps = j.value("min_substeps", s.min_substeps);
  s.max_substeps = j.value("max_substeps", s.max_substeps);
  s.residual_tol = j.value("residual_tol", s.residual_tol);
  s.max_newton_iters = j.value("max_newton_iters", s.max_newton_iters);
  return s;
}

/// center_start is optional: when absent the study places the indenter
/// tangent to each model's front face.
struct IndenterConfig {
  Indenter indenter;
  bool auto_center = true;
};

inline IndenterConfig indenter_from_json(const json& j) {
  IndenterConfig c;
  c.indenter.radius_mm = j.value("radius_mm", c.indenter.radius_mm);
  c.indenter.total_travel_mm = j.value("total_travel_mm", c.indenter.total_travel_mm);
  if (j.contains("direction")) {
    const auto& d = j.at("direction");
    c.indenter.travel_direction = Vec2{d.at(0).get<double>(), d.at(1).get<double>()}.normalized();
  }
  if (j.contains("center_start")) {
    const auto& p = j.at("center_start");
    c.indenter.center_start = {p.at(0).get<double>(), p.at(1).get<double>()};
    c.auto_center = false;
  }
  return c;
}

inline MechanismGeometry mechanism_from_json(const json& j) {
  MechanismGeometry g;
  g.l_eg_mm = j.value("l_eg_mm", g.l_eg_mm);
  g.crank_radius_mm = j.value("crank_radius_mm", g.crank_radius_mm);
  g.l_oc_mm = j.value("l_oc_mm", g.l_oc_mm);
  g.l_de_mm = j.value("l_de_mm", g.l_de_mm);
  g.l_fe_mm = j.value("l_fe_mm", g.l_fe_mm);
  g.l_fp_mm = j.value("l_fp_mm", g.l_fp_mm);
  g.l_cd_mm = j.value("l_cd_mm", g.l_cd_mm);
  g.l_fh_mm = j.value("l_fh_mm", g.l_fh_mm);
  g.lambda_deg = j.value("lambda_deg", g.lambda_deg);
  g.nu_deg = j.value("nu_deg", g.nu_deg);
  g.theta2_deg = j.value("theta2_deg", g.theta2_deg);
  auto range = [&](const char* key, AngleRange def) {
    if (!j.contains(key)) return def;
    const auto& r = j.at(key);
    return AngleRange{r.at(0).get<double>(), r.at(1).get<double>()};
  };
  g.phi = range("phi_range_deg", g.phi);
  g.xi = range("xi_range_deg", g.xi);
  g.mu = range("mu_range_deg", g.mu);
  g.eta = range("eta_range_deg", g.eta);
  return g;
}

inline CrankSchedule schedule_from_json(const json& j) {
  CrankSchedule s;
  s.crank_lo_deg = j.value("crank_lo_deg", s.crank_lo_deg);
  s.crank_hi_deg = j.value("crank_hi_deg", s.crank_hi_deg);
  s.zeta_deg = j.value("zeta_deg", s.zeta_deg);
  return s;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

}  // namespace auxgrip
