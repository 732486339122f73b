#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "auxgrip/fem.hpp"
#include "auxgrip/lattice.hpp"
#include "auxgrip/metrics.hpp"

namespace auxgrip {

struct Indenter {
  double radius_mm = 26.5;  // tomato-scale default
  Vec2 center_start{0.0, 0.0};
  Vec2 travel_direction{0.0, -1.0};
  double total_travel_mm = 0.0;

  void validate() const {
    if (!(radius_mm > 0.0)) throw ConfigError("indenter: radius must be positive");
    if (total_travel_mm < 0.0) throw ConfigError("indenter: travel must be >= 0");
    if (std::abs(travel_direction.norm() - 1.0) > 1e-12)
      throw ConfigError("indenter: travel direction must be a unit vector");
  }

  Vec2 center_at(double travel) const { return center_start + travel * travel_direction; }
};

struct IndentationStep {
  double travel_mm = 0.0;
  Vec2 contact_resultant{0.0, 0.0};      // force on the structure
  double contact_force_n = 0.0;          // |resultant|
  std::vector<double> node_forces;       // per front-face node, >= 0
  std::array<Vec2, 3> port_reaction_vec{};
  std::array<double, 3> port_reactions{};  // magnitudes P1..P3
  ContactProfile deformed_face;
  Eigen::VectorXd displacements;  // full nodal field (ux, uy, rz per node)
  double max_penetration_mm = 0.0;
  int newton_iters = 0;
};

struct IndentationHistory {
  std::vector<IndentationStep> steps;
  std::vector<std::string> warnings;
  double penalty_n_per_mm = 0.0;

  /// travel_mm, F_contact_N, P1_N, P2_N, P3_N
  void to_csv(std::ostream& out) const {
    csv::Writer w(out);
    w.row({"travel_mm", "F_contact_N", "P1_N", "P2_N", "P3_N"});
    for (const auto& s : steps)
      w.numeric_row({s.travel_mm, s.contact_force_n, s.port_reactions[0], s.port_reactions[1],
                     s.port_reactions[2]});
  }
};

namespace detail {

// Penalty contact against a rigid circle: nodes listed in `candidates` get a
// force kappa * penetration along the circle's outward normal.
class CircleContactField final : public NodalForceField {
 public:
  CircleContactField(const std::vector<int>& candidates, Vec2 center, double radius,
                     double penalty)
      : candidates_(candidates), center_(center), radius_(radius), penalty_(penalty) {}

  void eval(const LatticeModel& model, const Eigen::VectorXd& u, Eigen::VectorXd& f,
            std::vector<Eigen::Triplet<double>>& dfdu) const override {
    for (int n : candidates_) {
      const Vec2 pos{model.nodes[n].x + u[3 * n], model.nodes[n].y + u[3 * n + 1]};
      const Vec2 rel = pos - center_;
      const double rho = rel.norm();
      if (rho >= radius_ || rho < 1e-12) continue;
      const Vec2 nrm = rel / rho;
      const double pen = radius_ - rho;
      f[3 * n] += penalty_ * pen * nrm.x;
      f[3 * n + 1] += penalty_ * pen * nrm.y;
      // d f / d pos = kappa * (-n n^T + pen*(I - n n^T)/rho)
      const double nn[2][2] = {{nrm.x * nrm.x, nrm.x * nrm.y}, {nrm.y * nrm.x, nrm.y * nrm.y}};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double eye = (i == j) ? 1.0 : 0.0;
          const double v = penalty_ * (-nn[i][j] + pen * (eye - nn[i][j]) / rho);
          dfdu.emplace_back(3 * n + i, 3 * n + j, v);
        }
    }
  }

  double max_penetration(const LatticeModel& model, const Eigen::VectorXd& u) const {
    double pen = 0.0;
    for (int n : candidates_) {
      const Vec2 pos{model.nodes[n].x + u[3 * n], model.nodes[n].y + u[3 * n + 1]};
      pen = std::max(pen, radius_ - (pos - center_).norm());
    }
    return pen;
  }

  void nodal_forces(const LatticeModel& model, const Eigen::VectorXd& u,
                    std::vector<double>& mags, Vec2& resultant) const {
    mags.assign(candidates_.size(), 0.0);
    resultant = {0.0, 0.0};
    for (size_t i = 0; i < candidates_.size(); ++i) {
      const int n = candidates_[i];
      const Vec2 pos{model.nodes[n].x + u[3 * n], model.nodes[n].y + u[3 * n + 1]};
      const Vec2 rel = pos - center_;
      const double rho = rel.norm();
      if (rho >= radius_ || rho < 1e-12) continue;
      const double fmag = penalty_ * (radius_ - rho);
      mags[i] = fmag;
      resultant += fmag * (rel / rho);
    }
  }

 private:
  std::vector<int> candidates_;
  Vec2 center_;
  double radius_;
  double penalty_;
};

}  // namespace detail

/// Penalty stiffness used when none is given: 100 x the stiffest EA/L of the
/// front-face segments.
inline double default_contact_penalty(const LatticeModel& model) {
  if (model.front_face_nodes.size() < 2)
    throw InputError("contact: model has no front face");
  std::vector<char> on_face(model.nodes.size(), 0);
  for (int n : model.front_face_nodes) on_face[n] = 1;
  double best = 0.0;
  for (size_t e = 0; e < model.elements.size(); ++e) {
    const auto& el = model.elements[e];
    if (!on_face[el.node_a] || !on_face[el.node_b]) continue;
    const double len = model.element_length(static_cast<int>(e));
    const double ea = model.material.youngs_modulus_mpa * model.sections[el.section].area_mm2;
    best = std::max(best, ea / len);
  }
  if (best <= 0.0) throw InputError("contact: front face carries no elements");
  return 100.0 * best;
}

/// Displacement-driven indentation by a rigid circle. The three ports are
/// pinned (ux, uy fixed, rz free); each of n_steps stations solves the
/// nonlinear frame equilibrium with penalty contact on the front-face nodes.
inline IndentationHistory simulate_indentation(const LatticeModel& model,
                                               const Indenter& indenter,
                                               const SolveSettings& settings, int n_steps,
                                               double penalty_n_per_mm = 0.0) {
  indenter.validate();
  settings.validate();
  if (!model.has_ports()) throw InputError("contact: model has no ports to support it");
  if (n_steps < 1) throw InputError("contact: need at least one step");

  const double penalty =
      penalty_n_per_mm > 0.0 ? penalty_n_per_mm : default_contact_penalty(model);

  BoundaryConditions bc;
  for (int p : model.port_nodes) bc.pin(p);
  bc.validate(static_cast<int>(model.nodes.size()));
  auto cs = detail::ConstraintSet::build(model, bc);

  // starting position must be contact free
  {
    detail::CircleContactField probe(model.front_face_nodes, indenter.center_start,
                                     indenter.radius_mm, penalty);
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.dof_count());
    if (probe.max_penetration(model, u0) > 1e-9)
      throw InputError("contact: indenter penetrates the undeformed face at travel 0");
  }

  IndentationHistory hist;
  hist.penalty_n_per_mm = penalty;
  const Eigen::VectorXd no_loads = Eigen::VectorXd::Zero(model.dof_count());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(model.dof_count());

  double solved_travel = 0.0;
  bool breakdown_warned = false;
  for (int k = 0; k <= n_steps; ++k) {
    const double travel = indenter.total_travel_mm * k / n_steps;

    // march to this station, bisecting the travel increment when Newton stalls
    int iters_at_station = 0;
    double from = solved_travel;
    int splits = 0;
    while (from < travel - 1e-15 || k == 0) {
      const double attempt = (splits == 0) ? travel : from + (travel - from) / (1 << splits);
      detail::CircleContactField field(model.front_face_nodes, indenter.center_at(attempt),
                                       indenter.radius_mm, penalty);
      Eigen::VectorXd u_try = u;
      cs.apply(1.0, u_try);
      auto res = detail::newton_equilibrium(model, cs, no_loads, &field, u_try, settings);
      if (res.converged) {
        u = u_try;
        from = attempt;
        iters_at_station += res.iters;
        if (splits > 0) splits = std::max(0, splits - 1);
      } else {
        ++splits;
        if (splits > 10)
          throw ConvergenceError("contact: no convergence (chattering active set?) at step " +
                                     std::to_string(k) + ", travel " + std::to_string(attempt) +
                                     " mm",
                                 from / std::max(indenter.total_travel_mm, 1e-12), res.residual);
      }
      if (k == 0) break;  // zero-travel station needs a single (trivial) solve
    }
    solved_travel = travel;

    detail::CircleContactField field(model.front_face_nodes, indenter.center_at(travel),
                                     indenter.radius_mm, penalty);
    IndentationStep step;
    step.travel_mm = travel;
    step.newton_iters = iters_at_station;
    field.nodal_forces(model, u, step.node_forces, step.contact_resultant);
    step.contact_force_n = step.contact_resultant.norm();
    step.max_penetration_mm = field.max_penetration(model, u);
    if (step.max_penetration_mm > 0.1 * indenter.radius_mm && !breakdown_warned) {
      hist.warnings.push_back("step " + std::to_string(k) + ": penetration " +
                              std::to_string(step.max_penetration_mm) +
                              " mm exceeds 10% of the indenter radius; results past this "
                              "travel are outside the model's validity");
      breakdown_warned = true;
    }

    auto reactions = detail::collect_reactions(model, cs, u, no_loads, &field);
    for (int p = 0; p < 3; ++p) {
      Vec2 r{0, 0};
      for (const auto& re : reactions)
        if (re.node == model.port_nodes[p]) {
          if (re.dof == Dof::ux) r.x = re.value;
          if (re.dof == Dof::uy) r.y = re.value;
        }
      step.port_reaction_vec[p] = r;
      step.port_reactions[p] = r.norm();
    }

    step.displacements = u;
    step.deformed_face.source = ContactProfile::Source::simulated;
    for (int n : model.front_face_nodes) {
      const Vec2 pos{model.nodes[n].x + u[3 * n], model.nodes[n].y + u[3 * n + 1]};
      step.deformed_face.samples.push_back(pos);
    }
    // contact can locally fold the face; keep the profile a function of x
    auto& pts = step.deformed_face.samples;
    std::vector<Vec2> mono;
    for (const auto& p : pts)
      if (mono.empty() || p.x > mono.back().x + 1e-12) mono.push_back(p);
    if (mono.size() != pts.size() && hist.warnings.empty())
      hist.warnings.push_back("step " + std::to_string(k) +
                              ": deformed face locally folded; profile filtered to "
                              "monotone x");
    pts = std::move(mono);

    hist.steps.push_back(std::move(step));
  }
  return hist;
}

}  // namespace auxgrip
