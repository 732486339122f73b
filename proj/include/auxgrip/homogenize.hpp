#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "auxgrip/fem.hpp"
#include "auxgrip/lattice.hpp"

namespace auxgrip {

/// Virtual uniaxial test on a bare cell patch: prescribe a uniform axial
/// displacement on the two x-extreme node columns (lateral edges traction
/// free), solve the linear frame problem and regress the transverse strain.
/// Returns -(transverse strain)/(axial strain).
inline double effective_poisson_ratio(const LatticeModel& patch, double strain) {
  if (patch.has_ports())
    throw InputError("effective_poisson_ratio expects a bare cell patch (no backbone/ports)");
  if (!(std::abs(strain) > 0.0 && std::abs(strain) <= 1e-3))
    throw InputError("effective_poisson_ratio: |strain| must be in (0, 1e-3]");

  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  for (const auto& p : patch.nodes) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  const double width = xmax - xmin;
  if (width <= 0) throw InputError("effective_poisson_ratio: degenerate patch");
  const double tol = 1e-9 * width;

  BoundaryConditions bc;
  std::vector<int> left, right;
  for (size_t n = 0; n < patch.nodes.size(); ++n) {
    if (patch.nodes[n].x < xmin + tol) left.push_back(static_cast<int>(n));
    if (patch.nodes[n].x > xmax - tol) right.push_back(static_cast<int>(n));
  }
  const double delta = strain * width;
  for (int n : left) bc.fix(n, Dof::ux);
  for (int n : right) bc.prescribe(n, Dof::ux, delta);
  // one uy pin kills the remaining translation; lowest-id node nearest mid-height
  double ymid = 0.0;
  for (const auto& p : patch.nodes) ymid += p.y;
  ymid /= static_cast<double>(patch.nodes.size());
  int pin = 0;
  double best = std::numeric_limits<double>::max();
  for (size_t n = 0; n < patch.nodes.size(); ++n) {
    const double dy = std::abs(patch.nodes[n].y - ymid);
    if (dy < best - 1e-12) {
      best = dy;
      pin = static_cast<int>(n);
    }
  }
  bc.fix(pin, Dof::uy);

  const auto hist = solve_linear(patch, bc);
  const auto& st = hist.last();

  // transverse strain from the least-squares slope of uy against y over the
  // interior (loaded edge columns excluded to limit boundary artifacts)
  double sy = 0, syy = 0, su = 0, syu = 0;
  int cnt = 0;
  for (size_t n = 0; n < patch.nodes.size(); ++n) {
    const double x = patch.nodes[n].x;
    if (x < xmin + tol || x > xmax - tol) continue;
    const double y = patch.nodes[n].y, u = st.uy(static_cast<int>(n));
    sy += y;
    syy += y * y;
    su += u;
    syu += y * u;
    ++cnt;
  }
  if (cnt < 2) throw InputError("effective_poisson_ratio: too few interior nodes");
  const double denom = cnt * syy - sy * sy;
  if (std::abs(denom) < 1e-30) throw InputError("effective_poisson_ratio: flat patch");
  const double eyy = (cnt * syu - sy * su) / denom;
  return -eyy / strain;
}

}  // namespace auxgrip
