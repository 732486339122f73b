#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "auxgrip/fem.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace auxgrip;
using testing_helpers::make_beam;

namespace {

// Instrumented strain-gauge beam from the measurement rig: acrylic,
// b = 10.4 mm, h = 1.57 mm, L = 8 mm, E = 3300 MPa.
LatticeModel gauge_beam(int n_el) { return make_beam(8.0, n_el, 3300.0, 1.57, 10.4); }

double gauge_beam_ei() {
  const double i = 10.4 * std::pow(1.57, 3) / 12.0;
  return 3300.0 * i;
}

}  // namespace

// ==========================================================
// Linear solve
// ==========================================================

TEST(LinearSolve, CantileverTipDeflectionMatchesClosedForm) {
  const auto m = gauge_beam(8);
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(static_cast<int>(m.nodes.size()) - 1, Dof::uy, -1.0);
  const auto hist = solve_linear(m, bc);
  const double tip = hist.last().uy(static_cast<int>(m.nodes.size()) - 1);
  const double expected = -std::pow(8.0, 3) / (3.0 * gauge_beam_ei());
  EXPECT_NEAR(expected, -1.54199e-2, 2e-6);  // frozen closed-form value
  EXPECT_NEAR(tip, expected, std::abs(expected) * 5e-3);
}

TEST(LinearSolve, ZeroLoadGivesZeroDisplacement) {
  const auto m = gauge_beam(6);
  BoundaryConditions bc;
  bc.clamp(0);
  const auto hist = solve_linear(m, bc);
  EXPECT_NEAR(hist.last().u.norm(), 0.0, 1e-15);
}

TEST(LinearSolve, Superposition) {
  const auto m = gauge_beam(8);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  BoundaryConditions bc1, bc2;
  bc1.clamp(0);
  bc2.clamp(0);
  bc1.load(tip, Dof::uy, -0.5);
  bc2.load(tip, Dof::uy, -1.0);
  const auto h1 = solve_linear(m, bc1), h2 = solve_linear(m, bc2);
  for (int i = 0; i < h1.last().u.size(); ++i)
    EXPECT_NEAR(2.0 * h1.last().u[i], h2.last().u[i], 1e-12);
}

TEST(LinearSolve, GlobalBalanceWithinTightTolerance) {
  const auto m = gauge_beam(8);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(tip, Dof::uy, -1.0);
  bc.load(tip, Dof::ux, 0.3);
  const auto hist = solve_linear(m, bc);
  const Vec2 gap = equilibrium_gap(hist.last(), bc);
  EXPECT_NEAR(gap.x, 0.0, 1e-9);
  EXPECT_NEAR(gap.y, 0.0, 1e-9);
}

TEST(LinearSolve, PrescribedTipDisplacementReaction) {
  const auto m = gauge_beam(8);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  BoundaryConditions bc;
  bc.clamp(0);
  const double delta = 0.01;
  bc.prescribe(tip, Dof::uy, delta);
  const auto hist = solve_linear(m, bc);
  double r_tip = 0.0;
  for (const auto& r : hist.last().reactions)
    if (r.node == tip && r.dof == Dof::uy) r_tip = r.value;
  const double k = 3.0 * gauge_beam_ei() / std::pow(8.0, 3);
  EXPECT_NEAR(r_tip, k * delta, k * delta * 5e-3);
}

TEST(LinearSolve, UnconstrainedModelReportsFreeRigidModes) {
  const auto m = gauge_beam(4);
  BoundaryConditions bc;  // nothing fixed
  try {
    solve_linear(m, bc);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("rigid-body"), std::string::npos);
    EXPECT_NE(msg.find("rotation"), std::string::npos);
  }
}

TEST(LinearSolve, PinOnlySupportStillReportsRotationMode) {
  const auto m = gauge_beam(4);
  BoundaryConditions bc;
  bc.pin(0);  // rotation about node 0 stays free
  EXPECT_THROW(solve_linear(m, bc), SolverError);
}

// ==========================================================
// Tangent consistency
// ==========================================================

namespace {

double tangent_fd_error(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 10.0), thick(0.5, 2.0), mod(100.0, 5000.0),
      disp(-0.3, 0.3), rot(-0.2, 0.2);
  std::uniform_int_distribution<int> n_nodes_d(2, 4);

  LatticeModel m;
  const int n_nodes = n_nodes_d(rng);
  for (int i = 0; i < n_nodes; ++i) {
    Vec2 p{pos(rng), pos(rng)};
    // keep nodes apart so no element degenerates
    bool ok = true;
    for (const auto& q : m.nodes)
      if ((q - p).norm() < 1.0) ok = false;
    if (!ok) {
      --i;
      continue;
    }
    m.nodes.push_back(p);
  }
  m.material.youngs_modulus_mpa = mod(rng);
  m.sections = {detail::rect_section(thick(rng), thick(rng))};
  for (int i = 0; i + 1 < n_nodes; ++i) m.elements.push_back({i, i + 1, 0});
  if (n_nodes == 4) m.elements.push_back({0, 3, 0});
  m.interior_node_count = n_nodes;

  Eigen::VectorXd u(m.dof_count());
  for (int i = 0; i < u.size(); ++i) u[i] = (i % 3 == 2) ? rot(rng) : disp(rng);

  Eigen::VectorXd f(m.dof_count());
  std::vector<Eigen::Triplet<double>> trips;
  assemble(m, u, f, &trips);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m.dof_count(), m.dof_count());
  for (const auto& t : trips) k(t.row(), t.col()) += t.value();

  Eigen::MatrixXd k_fd(m.dof_count(), m.dof_count());
  const double h = 1e-6;
  Eigen::VectorXd fp(m.dof_count()), fm(m.dof_count());
  for (int j = 0; j < m.dof_count(); ++j) {
    Eigen::VectorXd up = u, um = u;
    up[j] += h;
    um[j] -= h;
    assemble(m, up, fp, nullptr);
    assemble(m, um, fm, nullptr);
    k_fd.col(j) = (fp - fm) / (2.0 * h);
  }
  return (k - k_fd).norm() / k_fd.norm();
}

}  // namespace

TEST(Tangent, MatchesCentralFiniteDifferencesOnRandomFrames) {
  for (unsigned seed = 1; seed <= 20; ++seed)
    EXPECT_LE(tangent_fd_error(seed), 1e-5) << "seed " << seed;
}

// ==========================================================
// Nonlinear solve
// ==========================================================

TEST(NonlinearSolve, TinyLoadMatchesLinear) {
  const auto m = make_beam(100.0, 16, 1000.0, 1.0, 1.0);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  const double ei = 1000.0 / 12.0;
  const double p = 1e-4 * ei / (100.0 * 100.0);
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(tip, Dof::uy, -p);
  SolveSettings st;
  st.residual_tol = 1e-10;
  const auto lin = solve_linear(m, bc);
  const auto non = solve_nonlinear(m, bc, st);
  EXPECT_NEAR(non.last().uy(tip), lin.last().uy(tip), std::abs(lin.last().uy(tip)) * 1e-3);
}

TEST(NonlinearSolve, LargeDeflectionMatchesEllipticIntegral) {
  const double length = 100.0, e_mod = 1000.0;
  const auto m = make_beam(length, 32, e_mod, 1.0, 1.0);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  const double ei = e_mod * (1.0 / 12.0);
  for (double beta : {1.0, 2.0, 5.0}) {
    BoundaryConditions bc;
    bc.clamp(0);
    bc.load(tip, Dof::uy, -beta * ei / (length * length));
    SolveSettings st;
    st.residual_tol = 1e-9;
    const auto hist = solve_nonlinear(m, bc, st);
    const auto sol = oracles::cantilever_large_deflection(beta);
    const double w = -hist.last().uy(tip) / length;
    EXPECT_NEAR(w, sol.w_over_l, sol.w_over_l * 0.01) << "beta " << beta;
    const double x_tip = (m.nodes[tip].x + hist.last().ux(tip)) / length;
    EXPECT_NEAR(x_tip, sol.x_over_l, 0.01) << "beta " << beta;
  }
}

TEST(NonlinearSolve, HistoryIsStrictlyIncreasingAndEndsAtOne) {
  const auto m = make_beam(100.0, 8, 1000.0, 1.0, 1.0);
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(static_cast<int>(m.nodes.size()) - 1, Dof::uy, -0.02);
  SolveSettings st;
  const auto hist = solve_nonlinear(m, bc, st);
  ASSERT_GE(hist.substeps.size(), static_cast<size_t>(st.min_substeps));
  for (size_t i = 1; i < hist.substeps.size(); ++i)
    EXPECT_GT(hist.substeps[i].load_factor, hist.substeps[i - 1].load_factor);
  EXPECT_DOUBLE_EQ(hist.substeps.back().load_factor, 1.0);
}

TEST(NonlinearSolve, GlobalBalanceAtEverySubstep) {
  const auto m = make_beam(100.0, 16, 1000.0, 1.0, 1.0);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  const double p = 0.05;
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(tip, Dof::uy, -p);
  bc.load(tip, Dof::ux, 0.4 * p);
  const auto hist = solve_nonlinear(m, bc, SolveSettings{});
  for (const auto& st : hist.substeps) {
    const Vec2 gap = equilibrium_gap(st, bc);
    const double mag = st.load_factor * p;
    EXPECT_LE(std::abs(gap.x), 1e-6 * mag);
    EXPECT_LE(std::abs(gap.y), 1e-6 * mag);
  }
}

TEST(NonlinearSolve, CorotationalObjectivity) {
  // L-frame, clamped base, oblique tip load; rotating the whole problem
  // must rotate the converged displacement field.
  auto build = [](double rot_deg) {
    LatticeModel m;
    m.material.youngs_modulus_mpa = 2000.0;
    m.sections = {detail::rect_section(1.0, 1.0)};
    const int n = 6;
    for (int i = 0; i <= n; ++i) m.nodes.push_back({40.0 * i / n, 0.0});
    for (int i = 1; i <= n; ++i) m.nodes.push_back({40.0, 30.0 * i / n});
    for (int i = 0; i < 2 * n; ++i) m.elements.push_back({i, i + 1, 0});
    m.interior_node_count = static_cast<int>(m.nodes.size());
    const double a = deg2rad(rot_deg);
    for (auto& p : m.nodes) p = p.rotated(a);
    return m;
  };
  const double rot_deg = 37.0;
  const Vec2 load{0.8, -1.7};
  const auto m0 = build(0.0), m1 = build(rot_deg);
  const int tip = static_cast<int>(m0.nodes.size()) - 1;
  const Vec2 load_rot = load.rotated(deg2rad(rot_deg));

  SolveSettings st;
  st.residual_tol = 1e-10;
  BoundaryConditions bc0, bc1;
  bc0.clamp(0);
  bc1.clamp(0);
  bc0.load(tip, Dof::ux, load.x);
  bc0.load(tip, Dof::uy, load.y);
  bc1.load(tip, Dof::ux, load_rot.x);
  bc1.load(tip, Dof::uy, load_rot.y);
  const auto h0 = solve_nonlinear(m0, bc0, st);
  const auto h1 = solve_nonlinear(m1, bc1, st);
  for (size_t n = 0; n < m0.nodes.size(); ++n) {
    const Vec2 u0{h0.last().ux(static_cast<int>(n)), h0.last().uy(static_cast<int>(n))};
    const Vec2 expect = u0.rotated(deg2rad(rot_deg));
    EXPECT_NEAR(h1.last().ux(static_cast<int>(n)), expect.x, 1e-7);
    EXPECT_NEAR(h1.last().uy(static_cast<int>(n)), expect.y, 1e-7);
    EXPECT_NEAR(h1.last().rz(static_cast<int>(n)), h0.last().rz(static_cast<int>(n)), 1e-7);
  }
}

TEST(NonlinearSolve, SymmetricFrameSymmetricLoad) {
  // portal frame symmetric about x = 50
  LatticeModel m;
  m.material.youngs_modulus_mpa = 2000.0;
  m.sections = {detail::rect_section(1.5, 1.5)};
  const int n = 4;
  for (int i = 0; i <= n; ++i) m.nodes.push_back({0.0, 30.0 * i / n});        // left column
  for (int i = 1; i <= 2 * n; ++i) m.nodes.push_back({100.0 * i / (2 * n), 30.0});  // beam
  for (int i = 1; i <= n; ++i) m.nodes.push_back({100.0, 30.0 - 30.0 * i / n});     // right col
  for (size_t i = 0; i + 1 < m.nodes.size(); ++i)
    m.elements.push_back({static_cast<int>(i), static_cast<int>(i) + 1, 0});
  m.interior_node_count = static_cast<int>(m.nodes.size());
  BoundaryConditions bc;
  bc.clamp(0);
  bc.clamp(static_cast<int>(m.nodes.size()) - 1);
  const int mid = n + n;  // beam midpoint at x = 50
  ASSERT_NEAR(m.nodes[mid].x, 50.0, 1e-12);
  bc.load(mid, Dof::uy, -0.5);
  const auto hist = solve_nonlinear(m, bc, SolveSettings{});

  // mirror-pair check
  for (size_t a = 0; a < m.nodes.size(); ++a) {
    for (size_t b = a; b < m.nodes.size(); ++b) {
      if (std::abs(m.nodes[a].x + m.nodes[b].x - 100.0) < 1e-9 &&
          std::abs(m.nodes[a].y - m.nodes[b].y) < 1e-9) {
        EXPECT_NEAR(hist.last().uy(static_cast<int>(a)), hist.last().uy(static_cast<int>(b)),
                    1e-8);
        EXPECT_NEAR(hist.last().ux(static_cast<int>(a)), -hist.last().ux(static_cast<int>(b)),
                    1e-8);
      }
    }
  }
}

TEST(NonlinearSolve, ExternalWorkIsPositiveAlongThePath) {
  const auto m = make_beam(100.0, 16, 1000.0, 1.0, 1.0);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  const double p = 0.04;
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(tip, Dof::uy, -p);
  const auto hist = solve_nonlinear(m, bc, SolveSettings{});
  double work = 0.0;
  double prev_lambda = 0.0, prev_uy = 0.0;
  for (const auto& st : hist.substeps) {
    const double f_prev = -p * prev_lambda, f_now = -p * st.load_factor;
    work += 0.5 * (f_prev + f_now) * (st.uy(tip) - prev_uy);
    EXPECT_GT(work, 0.0);
    prev_lambda = st.load_factor;
    prev_uy = st.uy(tip);
  }
}

TEST(NonlinearSolve, ConvergenceFailureCarriesLastLoadFactor) {
  const auto m = make_beam(100.0, 8, 1000.0, 1.0, 1.0);
  const int tip = static_cast<int>(m.nodes.size()) - 1;
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(tip, Dof::uy, -5.0);  // far beyond the 90-degree tip angle
  SolveSettings st;
  st.min_substeps = 1;
  st.max_substeps = 2;
  st.max_newton_iters = 3;
  try {
    solve_nonlinear(m, bc, st);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GE(e.last_load_factor, 0.0);
    EXPECT_LT(e.last_load_factor, 1.0);
  }
}

TEST(History, CsvExportShape) {
  const auto m = make_beam(10.0, 2, 1000.0, 1.0, 1.0);
  BoundaryConditions bc;
  bc.clamp(0);
  bc.load(2, Dof::uy, -0.001);
  SolveSettings st;
  st.min_substeps = 2;
  const auto hist = solve_nonlinear(m, bc, st);
  std::ostringstream os;
  hist.to_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "substep,node,load_factor,ux_mm,uy_mm,rz_rad");
  size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, hist.substeps.size() * m.nodes.size());
}
