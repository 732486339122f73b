#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "auxgrip/common.hpp"
#include "auxgrip/csv.hpp"
#include "auxgrip/lattice.hpp"

namespace auxgrip {

enum class Dof : int { ux = 0, uy = 1, rz = 2 };

inline int dof_index(int node, Dof d) { return 3 * node + static_cast<int>(d); }

inline const char* dof_name(Dof d) {
  switch (d) {
    case Dof::ux: return "ux";
    case Dof::uy: return "uy";
    default: return "rz";
  }
}

struct BoundaryConditions {
  std::set<std::pair<int, Dof>> fixed;                  // held at zero
  std::map<std::pair<int, Dof>, double> prescribed;     // ramped to target
  std::map<std::pair<int, Dof>, double> nodal_loads;    // ramped force/moment

  void fix(int node, Dof d) { fixed.insert({node, d}); }
  void pin(int node) {
    fix(node, Dof::ux);
    fix(node, Dof::uy);
  }
  void clamp(int node) {
    pin(node);
    fix(node, Dof::rz);
  }
  void prescribe(int node, Dof d, double value) { prescribed[{node, d}] = value; }
  void load(int node, Dof d, double value) { nodal_loads[{node, d}] += value; }

  void validate(int node_count) const {
    for (const auto& [key, v] : prescribed)
      if (fixed.count(key))
        throw ConfigError("bc: dof (" + std::to_string(key.first) + ", " +
                          dof_name(key.second) + ") is both fixed and prescribed");
    for (const auto& [key, v] : nodal_loads)
      if (fixed.count(key))
        throw ConfigError("bc: load applied to fixed dof (" + std::to_string(key.first) +
                          ", " + dof_name(key.second) + ")");
    auto check_node = [&](int n) {
      if (n < 0 || n >= node_count)
        throw ConfigError("bc: node " + std::to_string(n) + " out of range");
    };
    for (const auto& k : fixed) check_node(k.first);
    for (const auto& [k, v] : prescribed) check_node(k.first);
    for (const auto& [k, v] : nodal_loads) check_node(k.first);
  }
};

struct SolveSettings {
  int min_substeps = 20;
  int max_substeps = 100;
  double residual_tol = 1e-6;  // relative force norm
  int max_newton_iters = 50;

  void validate() const {
    if (min_substeps < 1 || min_substeps > max_substeps)
      throw ConfigError("solve settings: need 1 <= min_substeps <= max_substeps");
    if (residual_tol <= 0) throw ConfigError("solve settings: residual_tol must be > 0");
    if (max_newton_iters < 1) throw ConfigError("solve settings: max_newton_iters must be >= 1");
  }
};

struct Reaction {
  int node;
  Dof dof;
  double value;  // N or N*mm
};

struct Substep {
  double load_factor = 0.0;
  Eigen::VectorXd u;  // 3 dofs per node: ux, uy, rz
  std::vector<Reaction> reactions;
  int newton_iters = 0;

  double ux(int node) const { return u[3 * node + 0]; }
  double uy(int node) const { return u[3 * node + 1]; }
  double rz(int node) const { return u[3 * node + 2]; }
};

struct DeformedHistory {
  std::vector<Substep> substeps;

  const Substep& last() const {
    if (substeps.empty()) throw InputError("history is empty");
    return substeps.back();
  }

  /// One row per (substep, node): load_factor, ux, uy, rz.
  void to_csv(std::ostream& out) const {
    csv::Writer w(out);
    w.row({"substep", "node", "load_factor", "ux_mm", "uy_mm", "rz_rad"});
    for (size_t s = 0; s < substeps.size(); ++s) {
      const auto& st = substeps[s];
      const int n_nodes = static_cast<int>(st.u.size()) / 3;
      for (int n = 0; n < n_nodes; ++n)
        w.row({std::to_string(s), std::to_string(n), csv::format_double(st.load_factor),
               csv::format_double(st.ux(n)), csv::format_double(st.uy(n)),
               csv::format_double(st.rz(n))});
    }
  }
};

/// Displacement-dependent nodal forces (used for contact). eval() adds forces
/// into `f` and appends d(force)/d(displacement) triplets.
class NodalForceField {
 public:
  virtual ~NodalForceField() = default;
  virtual void eval(const LatticeModel& model, const Eigen::VectorXd& u, Eigen::VectorXd& f,
                    std::vector<Eigen::Triplet<double>>& dfdu) const = 0;
};

namespace detail {

// Corotational 2-node Euler-Bernoulli beam: internal force and consistent
// tangent in global coordinates. Dof order: [uxa, uya, ra, uxb, uyb, rb].
struct CorotBeam {
  Eigen::Matrix<double, 6, 1> f = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
};

inline CorotBeam corot_beam(const Vec2& xa, const Vec2& xb, double ea, double ei,
                            const Eigen::Matrix<double, 6, 1>& d, bool tangent) {
  const Vec2 d0 = xb - xa;
  const double l0 = d0.norm();
  const Vec2 pa{xa.x + d[0], xa.y + d[1]};
  const Vec2 pb{xb.x + d[3], xb.y + d[4]};
  const Vec2 dv = pb - pa;
  const double ln = dv.norm();
  if (ln < 1e-12 || l0 < 1e-12) throw SolverError("element collapsed to zero length");
  const double c = dv.x / ln, s = dv.y / ln;
  const double beta0 = std::atan2(d0.y, d0.x);
  const double beta = std::atan2(dv.y, dv.x);
  const double t1 = wrap_pi(d[2] - (beta - beta0));
  const double t2 = wrap_pi(d[5] - (beta - beta0));
  const double ul = (ln * ln - l0 * l0) / (ln + l0);  // avoids cancellation

  const double n_ax = ea * ul / l0;
  const double m1 = (ei / l0) * (4.0 * t1 + 2.0 * t2);
  const double m2 = (ei / l0) * (2.0 * t1 + 4.0 * t2);

  using V6 = Eigen::Matrix<double, 6, 1>;
  V6 b1, z;
  b1 << -c, -s, 0, c, s, 0;
  z << s, -c, 0, -s, c, 0;
  V6 b2 = -z / ln, b3 = -z / ln;
  b2[2] += 1.0;
  b3[5] += 1.0;

  CorotBeam out;
  out.f = n_ax * b1 + m1 * b2 + m2 * b3;
  if (tangent) {
    Eigen::Matrix<double, 3, 6> bmat;
    bmat.row(0) = b1.transpose();
    bmat.row(1) = b2.transpose();
    bmat.row(2) = b3.transpose();
    Eigen::Matrix3d kl = Eigen::Matrix3d::Zero();
    kl(0, 0) = ea / l0;
    kl(1, 1) = kl(2, 2) = 4.0 * ei / l0;
    kl(1, 2) = kl(2, 1) = 2.0 * ei / l0;
    out.k = bmat.transpose() * kl * bmat;
    out.k += (n_ax / ln) * (z * z.transpose());
    out.k += ((m1 + m2) / (ln * ln)) * (b1 * z.transpose() + z * b1.transpose());
  }
  return out;
}

inline void scatter(const LatticeModel& m, int e, const CorotBeam& cb, Eigen::VectorXd& f_int,
                    std::vector<Eigen::Triplet<double>>* trips) {
  const int a = m.elements[e].node_a, b = m.elements[e].node_b;
  const int map[6] = {3 * a, 3 * a + 1, 3 * a + 2, 3 * b, 3 * b + 1, 3 * b + 2};
  for (int i = 0; i < 6; ++i) f_int[map[i]] += cb.f[i];
  if (trips)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) trips->emplace_back(map[i], map[j], cb.k(i, j));
}

}  // namespace detail

/// Internal force vector and (optionally) tangent stiffness triplets at
/// displacement state u.
inline void assemble(const LatticeModel& m, const Eigen::VectorXd& u, Eigen::VectorXd& f_int,
                     std::vector<Eigen::Triplet<double>>* trips) {
  const double e_mod = m.material.youngs_modulus_mpa;  // MPa = N/mm^2
  f_int.setZero(m.dof_count());
  if (trips) trips->clear();
  Eigen::Matrix<double, 6, 1> d;
  for (size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    const BeamSection& sec = m.sections.at(el.section);
    for (int i = 0; i < 3; ++i) {
      d[i] = u[3 * el.node_a + i];
      d[3 + i] = u[3 * el.node_b + i];
    }
    const auto cb = detail::corot_beam(m.nodes[el.node_a], m.nodes[el.node_b],
                                       e_mod * sec.area_mm2, e_mod * sec.second_moment_mm4, d,
                                       trips != nullptr);
    detail::scatter(m, static_cast<int>(e), cb, f_int, trips);
  }
}

namespace detail {

// Checks which rigid-body modes the constraint set leaves free; returns their
// names (empty when translations and rotation are all blocked).
inline std::vector<std::string> free_rigid_modes(const LatticeModel& m,
                                                 const std::vector<int>& constrained) {
  Vec2 c{0, 0};
  for (const auto& p : m.nodes) c += p;
  c = c / static_cast<double>(m.nodes.size());
  // rigid basis restricted to constrained dofs, accumulated as a Gram matrix
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  for (int dof : constrained) {
    const int node = dof / 3, comp = dof % 3;
    Eigen::Vector3d row;  // columns: translate-x, translate-y, rotate about centroid
    if (comp == 0)
      row << 1.0, 0.0, -(m.nodes[node].y - c.y);
    else if (comp == 1)
      row << 0.0, 1.0, (m.nodes[node].x - c.x);
    else
      row << 0.0, 0.0, 1.0;
    gram += row * row.transpose();
  }
  std::vector<std::string> out;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gram);
  const double big = std::max(1.0, es.eigenvalues()[2]);
  const char* names[3] = {"translation-x", "translation-y", "rotation"};
  for (int i = 0; i < 3; ++i)
    if (es.eigenvalues()[i] < 1e-10 * big) {
      int dominant = 0;
      es.eigenvectors().col(i).cwiseAbs().maxCoeff(&dominant);
      out.push_back(names[dominant]);
    }
  return out;
}

struct ConstraintSet {
  std::vector<int> dofs;          // sorted constrained dof indices
  std::vector<double> values;     // target at full load factor
  std::vector<int> dof_to_free;   // global dof -> free index or -1
  int n_free = 0;

  static ConstraintSet build(const LatticeModel& m, const BoundaryConditions& bc) {
    ConstraintSet cs;
    std::map<int, double> cmap;
    for (const auto& k : bc.fixed) cmap[dof_index(k.first, k.second)] = 0.0;
    for (const auto& [k, v] : bc.prescribed) cmap[dof_index(k.first, k.second)] = v;
    for (const auto& [dof, v] : cmap) {
      cs.dofs.push_back(dof);
      cs.values.push_back(v);
    }
    cs.dof_to_free.assign(m.dof_count(), -1);
    std::set<int> cset(cs.dofs.begin(), cs.dofs.end());
    for (int i = 0; i < m.dof_count(); ++i)
      if (!cset.count(i)) cs.dof_to_free[i] = cs.n_free++;
    return cs;
  }

  void apply(double load_factor, Eigen::VectorXd& u) const {
    for (size_t i = 0; i < dofs.size(); ++i) u[dofs[i]] = load_factor * values[i];
  }
};

inline Eigen::VectorXd external_loads(const LatticeModel& m, const BoundaryConditions& bc,
                                      double load_factor) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m.dof_count());
  for (const auto& [k, v] : bc.nodal_loads) f[dof_index(k.first, k.second)] = load_factor * v;
  return f;
}

struct NewtonOutcome {
  bool converged = false;
  int iters = 0;
  double residual = 0.0;
};

// Full-Newton equilibrium at fixed constraint values and fixed applied loads,
// with backtracking on the residual norm and a per-iteration displacement cap
// so stiff unilateral contact cannot throw the iterate into another
// equilibrium basin. Updates u in place; caller restores u on failure.
inline NewtonOutcome newton_equilibrium(const LatticeModel& m, const ConstraintSet& cs,
                                        const Eigen::VectorXd& f_applied,
                                        const NodalForceField* field, Eigen::VectorXd& u,
                                        const SolveSettings& st) {
  NewtonOutcome out;
  const int n = m.dof_count();
  // absolute floor at the roundoff level of element forces, so loads near
  // zero still terminate
  double ea_max = 0.0;
  for (const auto& el : m.elements)
    ea_max = std::max(ea_max, m.material.youngs_modulus_mpa * m.sections.at(el.section).area_mm2);
  const double floor = std::max(1e-13 * ea_max, 1e-14);
  // displacement cap: a twentieth of the model extent per Newton update
  double ext = 0.0;
  for (const auto& p : m.nodes) ext = std::max({ext, std::abs(p.x), std::abs(p.y)});
  const double du_cap = std::max(0.05 * ext, 1e-6);

  Eigen::VectorXd f_int(n), f_ext(n), f_field(n);
  std::vector<Eigen::Triplet<double>> trips, ftrips;

  auto residual_free = [&](const Eigen::VectorXd& state, Eigen::VectorXd& fi,
                           Eigen::VectorXd& fe, bool with_tangent) {
    assemble(m, state, fi, with_tangent ? &trips : nullptr);
    fe = f_applied;
    if (field) {
      f_field.setZero(n);
      if (with_tangent) ftrips.clear();
      std::vector<Eigen::Triplet<double>> scratch;
      field->eval(m, state, f_field, with_tangent ? ftrips : scratch);
      fe += f_field;
    }
    double rnorm2 = 0.0;
    for (int d = 0; d < n; ++d)
      if (cs.dof_to_free[d] >= 0) {
        const double r = fe[d] - fi[d];
        rnorm2 += r * r;
      }
    return std::sqrt(rnorm2);
  };

  int stalls = 0;
  for (int it = 0; it <= st.max_newton_iters; ++it) {
    out.residual = residual_free(u, f_int, f_ext, true);
    double ref = f_ext.norm();
    double cons_norm = 0.0;
    for (size_t i = 0; i < cs.dofs.size(); ++i) cons_norm += f_int[cs.dofs[i]] * f_int[cs.dofs[i]];
    ref = std::max({ref, std::sqrt(cons_norm), floor / st.residual_tol});
    if (out.residual <= st.residual_tol * ref) {
      out.converged = true;
      return out;
    }
    if (it == st.max_newton_iters) return out;

    // reduced tangent: K - d(f_field)/du on free dofs
    std::vector<Eigen::Triplet<double>> red;
    red.reserve(trips.size() + ftrips.size());
    for (const auto& t : trips) {
      const int i = cs.dof_to_free[t.row()], j = cs.dof_to_free[t.col()];
      if (i >= 0 && j >= 0) red.emplace_back(i, j, t.value());
    }
    for (const auto& t : ftrips) {
      const int i = cs.dof_to_free[t.row()], j = cs.dof_to_free[t.col()];
      if (i >= 0 && j >= 0) red.emplace_back(i, j, -t.value());
    }
    Eigen::SparseMatrix<double> kff(cs.n_free, cs.n_free);
    kff.setFromTriplets(red.begin(), red.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(kff);
    if (lu.info() != Eigen::Success) return out;
    Eigen::VectorXd rf(cs.n_free);
    for (int d = 0; d < n; ++d)
      if (cs.dof_to_free[d] >= 0) rf[cs.dof_to_free[d]] = f_ext[d] - f_int[d];
    Eigen::VectorXd du = lu.solve(rf);
    if (!du.allFinite()) return out;
    const double du_max = du.cwiseAbs().maxCoeff();
    if (du_max > du_cap) du *= du_cap / du_max;

    // Energy line search on s(alpha) = r(u + alpha du) . du. The residual
    // norm itself spikes transiently on slender frames (axial stiffness),
    // so it is not a usable acceptance measure; the work measure is.
    Eigen::VectorXd fi_try(n), fe_try(n);
    const double s0 = std::abs(rf.dot(du));
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd u_base = u, u_try = u;
    for (int bt = 0; bt < 7; ++bt) {
      u_try = u_base;
      for (int d = 0; d < n; ++d)
        if (cs.dof_to_free[d] >= 0) u_try[d] += alpha * du[cs.dof_to_free[d]];
      const double r_try = residual_free(u_try, fi_try, fe_try, false);
      if (!std::isfinite(r_try)) {
        alpha *= 0.5;
        continue;
      }
      double s = 0.0;
      for (int d = 0; d < n; ++d)
        if (cs.dof_to_free[d] >= 0) s += (fe_try[d] - fi_try[d]) * du[cs.dof_to_free[d]];
      if (std::abs(s) <= 0.8 * s0 || r_try <= 0.5 * out.residual) {
        u = u_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.iters = it + 1;
    if (!accepted) {
      // keep the smallest finite step so contact active sets can settle,
      // but give up after repeated stalls
      if (u_try.allFinite()) u = u_try;
      if (++stalls >= 3) return out;
    } else {
      stalls = 0;
    }
  }
  return out;
}

inline std::vector<Reaction> collect_reactions(const LatticeModel& m, const ConstraintSet& cs,
                                               const Eigen::VectorXd& u,
                                               const Eigen::VectorXd& f_applied,
                                               const NodalForceField* field) {
  Eigen::VectorXd f_int(m.dof_count());
  assemble(m, u, f_int, nullptr);
  Eigen::VectorXd f_ext = f_applied;
  if (field) {
    std::vector<Eigen::Triplet<double>> ignore;
    Eigen::VectorXd ff = Eigen::VectorXd::Zero(m.dof_count());
    field->eval(m, u, ff, ignore);
    f_ext += ff;
  }
  std::vector<Reaction> out;
  out.reserve(cs.dofs.size());
  for (int dof : cs.dofs)
    out.push_back({dof / 3, static_cast<Dof>(dof % 3), f_int[dof] - f_ext[dof]});
  return out;
}

}  // namespace detail

/// Small-displacement solve: tangent at the undeformed state, one step.
inline DeformedHistory solve_linear(const LatticeModel& m, const BoundaryConditions& bc) {
  bc.validate(static_cast<int>(m.nodes.size()));
  auto cs = detail::ConstraintSet::build(m, bc);
  {
    auto modes = detail::free_rigid_modes(m, cs.dofs);
    if (!modes.empty()) {
      std::string msg = "linear solve: stiffness is rank deficient; free rigid-body mode(s):";
      for (const auto& s : modes) msg += " " + s;
      throw SolverError(msg);
    }
  }
  const int n = m.dof_count();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(n), f0(n);
  std::vector<Eigen::Triplet<double>> trips;
  assemble(m, zero, f0, &trips);

  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  cs.apply(1.0, u);
  const Eigen::VectorXd f_ext = detail::external_loads(m, bc, 1.0);
  // rhs on free dofs: f - K_fc * u_c
  const Eigen::VectorXd ku = k * u;
  std::vector<Eigen::Triplet<double>> red;
  for (const auto& t : trips) {
    const int i = cs.dof_to_free[t.row()], j = cs.dof_to_free[t.col()];
    if (i >= 0 && j >= 0) red.emplace_back(i, j, t.value());
  }
  Eigen::SparseMatrix<double> kff(cs.n_free, cs.n_free);
  kff.setFromTriplets(red.begin(), red.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(kff);
  if (lu.info() != Eigen::Success)
    throw SolverError("linear solve: factorization failed (internal mechanism?)");
  Eigen::VectorXd rhs(cs.n_free);
  for (int d = 0; d < n; ++d)
    if (cs.dof_to_free[d] >= 0) rhs[cs.dof_to_free[d]] = f_ext[d] - ku[d];
  const Eigen::VectorXd uf = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !uf.allFinite())
    throw SolverError("linear solve: back substitution failed");
  for (int d = 0; d < n; ++d)
    if (cs.dof_to_free[d] >= 0) u[d] = uf[cs.dof_to_free[d]];

  Substep st;
  st.load_factor = 1.0;
  st.u = u;
  st.newton_iters = 1;
  const Eigen::VectorXd fr = k * u - f_ext;
  for (int dof : cs.dofs) st.reactions.push_back({dof / 3, static_cast<Dof>(dof % 3), fr[dof]});
  DeformedHistory h;
  h.substeps.push_back(std::move(st));
  return h;
}

/// Incremental-iterative solve with adaptive load stepping: the increment
/// starts at 1/min_substeps and is halved whenever Newton fails to converge,
/// within a budget of max_substeps accepted steps.
inline DeformedHistory solve_nonlinear(const LatticeModel& m, const BoundaryConditions& bc,
                                       const SolveSettings& settings,
                                       const NodalForceField* field = nullptr) {
  settings.validate();
  bc.validate(static_cast<int>(m.nodes.size()));
  auto cs = detail::ConstraintSet::build(m, bc);
  {
    auto modes = detail::free_rigid_modes(m, cs.dofs);
    if (!modes.empty()) {
      std::string msg = "nonlinear solve: free rigid-body mode(s):";
      for (const auto& s : modes) msg += " " + s;
      throw SolverError(msg);
    }
  }

  DeformedHistory hist;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m.dof_count());
  double lambda = 0.0;
  double dlam = 1.0 / settings.min_substeps;
  int accepted = 0;
  double last_residual = 0.0;
  while (lambda < 1.0 - 1e-12) {
    const double target = std::min(1.0, lambda + dlam);
    Eigen::VectorXd u_try = u;
    cs.apply(target, u_try);
    const Eigen::VectorXd f_applied = detail::external_loads(m, bc, target);
    auto res = detail::newton_equilibrium(m, cs, f_applied, field, u_try, settings);
    last_residual = res.residual;
    if (res.converged) {
      if (accepted >= settings.max_substeps)
        throw ConvergenceError(
            "nonlinear solve: substep budget (" + std::to_string(settings.max_substeps) +
                ") exhausted at load factor " + std::to_string(lambda),
            lambda, last_residual);
      u = u_try;
      lambda = target;
      ++accepted;
      Substep st;
      st.load_factor = lambda;
      st.u = u;
      st.newton_iters = res.iters;
      st.reactions = detail::collect_reactions(m, cs, u, f_applied, field);
      hist.substeps.push_back(std::move(st));
      if (res.iters <= 5) dlam = std::min(dlam * 1.5, 1.0 / settings.min_substeps);
    } else {
      dlam *= 0.5;
      if (dlam < 1e-8)
        throw ConvergenceError("nonlinear solve: no convergence, last converged load factor " +
                                   std::to_string(lambda),
                               lambda, last_residual);
    }
  }
  return hist;
}

/// Sum of reactions plus applied loads per direction; near zero at equilibrium.
inline Vec2 equilibrium_gap(const Substep& st, const BoundaryConditions& bc) {
  Vec2 gap{0, 0};
  for (const auto& r : st.reactions) {
    if (r.dof == Dof::ux) gap.x += r.value;
    if (r.dof == Dof::uy) gap.y += r.value;
  }
  for (const auto& [k, v] : bc.nodal_loads) {
    if (k.second == Dof::ux) gap.x += st.load_factor * v;
    if (k.second == Dof::uy) gap.y += st.load_factor * v;
  }
  return gap;
}

}  // namespace auxgrip
