#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "auxgrip/common.hpp"
#include "auxgrip/csv.hpp"

namespace auxgrip {

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

struct ContactProfile {
  enum class Source { simulated, measured };
  std::vector<Vec2> samples;  // x strictly increasing
  Source source = Source::simulated;

  void validate() const {
    if (samples.size() < 7)
      throw InputError("contact profile: need at least 7 samples, got " +
                       std::to_string(samples.size()));
    for (size_t i = 1; i < samples.size(); ++i)
      if (!(samples[i].x > samples[i - 1].x))
        throw InputError("contact profile: x must be strictly increasing (sample " +
                         std::to_string(i) + ")");
  }
};

struct CurvatureProfile {
  std::vector<Vec2> samples;  // (x, k); k >= 0
  double average_curvature = 0.0;
  int smoothing_window = 0;
};

struct CenterlineProfile {
  struct Sample {
    double x;
    double eyy;  // vertical strain
    double v;    // vertical displacement, mm
  };
  std::vector<Sample> samples;
};

struct ForceStats {
  double mean_n = 0.0;
  double sd_n = 0.0;  // sample standard deviation (N-1 divisor)
  double peak_n = 0.0;
  double t_peak_s = 0.0;
};

/// Per-node displacement data used by the centerline extraction.
struct NodalDisplacementField {
  std::vector<Vec2> node_xy;
  std::vector<double> uy;
};

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

/// Pointwise curvature k = |y''| / (1 + y'^2)^{3/2} with derivatives from a
/// local quadratic least-squares fit over `window` samples. The first and
/// last samples fall into one-sided windows, where a quadratic evaluated at
/// the window edge carries an O(span) third-derivative bias; those windows
/// use a quartic fit instead, which keeps circle profiles accurate to <1e-3.
inline CurvatureProfile curvature_profile(const ContactProfile& profile, int window = 7) {
  profile.validate();
  const int n = static_cast<int>(profile.samples.size());
  if (window % 2 == 0 || window < 5 || window > n)
    throw InputError("curvature: window must be odd and in [5, sample count]");

  CurvatureProfile out;
  out.smoothing_window = window;
  out.samples.reserve(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const int lo = std::clamp(i - window / 2, 0, n - window);
    const bool one_sided = (lo != i - window / 2);
    const int terms = one_sided ? std::min(5, window) : 3;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(terms, terms);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(terms);
    Eigen::VectorXd phi(terms);
    for (int j = lo; j < lo + window; ++j) {
      // both coordinates relative to the evaluation sample: derivatives are
      // unchanged and the normal equations stay well conditioned
      const double dx = profile.samples[j].x - profile.samples[i].x;
      const double dy = profile.samples[j].y - profile.samples[i].y;
      double pw = 1.0;
      for (int c = 0; c < terms; ++c) {
        phi[c] = pw;
        pw *= dx;
      }
      a += phi * phi.transpose();
      b += phi * dy;
    }
    const Eigen::VectorXd coef = a.ldlt().solve(b);
    const double yp = coef[1], ypp = 2.0 * coef[2];
    const double k = std::abs(ypp) / std::pow(1.0 + yp * yp, 1.5);
    out.samples.push_back({profile.samples[i].x, k});
    sum += k;
  }
  out.average_curvature = sum / n;
  return out;
}

// ---------------------------------------------------------------------------
// Circle fit
// ---------------------------------------------------------------------------

struct CircleFit {
  double cx = 0.0, cy = 0.0, radius = 0.0;
  double rms_residual = 0.0;
};

/// Kasa algebraic circle fit refined by one Gauss-Newton geometric pass.
inline CircleFit fit_circle(const ContactProfile& profile) {
  const auto& pts = profile.samples;
  if (pts.size() < 3) throw InputError("circle fit: need at least 3 samples");

  // collinearity check: max triangle area against the span
  double span = 0.0, max_cross = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) span = std::max(span, (pts[i] - pts[0]).norm());
  for (size_t i = 1; i + 1 < pts.size(); ++i)
    max_cross = std::max(max_cross,
                         std::abs((pts[i] - pts[0]).cross(pts[pts.size() - 1] - pts[0])));
  if (max_cross < 1e-10 * span * span)
    throw FitError("circle fit: samples are collinear (infinite radius)");

  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d phi(p.x, p.y, 1.0);
    a += phi * phi.transpose();
    b += phi * (p.x * p.x + p.y * p.y);
  }
  const Eigen::Vector3d sol = a.ldlt().solve(b);
  CircleFit fit;
  fit.cx = sol[0] / 2.0;
  fit.cy = sol[1] / 2.0;
  const double r2 = sol[2] + fit.cx * fit.cx + fit.cy * fit.cy;
  if (!(r2 > 0.0) || !std::isfinite(r2)) throw FitError("circle fit: degenerate algebraic fit");
  fit.radius = std::sqrt(r2);

  // one Gauss-Newton pass on the geometric distance
  Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
  Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
  for (const auto& p : pts) {
    const double dx = p.x - fit.cx, dy = p.y - fit.cy;
    const double rho = std::hypot(dx, dy);
    if (rho < 1e-12) continue;
    const Eigen::Vector3d jac(-dx / rho, -dy / rho, -1.0);
    jtj += jac * jac.transpose();
    jtr += jac * (rho - fit.radius);
  }
  const Eigen::Vector3d step = jtj.ldlt().solve(-jtr);
  if (step.allFinite()) {
    fit.cx += step[0];
    fit.cy += step[1];
    fit.radius += step[2];
  }
  double ss = 0.0;
  for (const auto& p : pts) {
    const double r = std::hypot(p.x - fit.cx, p.y - fit.cy) - fit.radius;
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(pts.size()));
  if (!(fit.radius > 0.0) || !std::isfinite(fit.radius))
    throw FitError("circle fit: Gauss-Newton pass diverged");
  return fit;
}

inline double fit_circle_radius(const ContactProfile& profile) { return fit_circle(profile).radius; }

/// Osculating radius at the profile apex (the sample farthest from the chord
/// midline), the alternate R2 definition.
inline double apex_radius(const ContactProfile& profile, int window = 7) {
  const auto curv = curvature_profile(profile, window);
  const auto& pts = profile.samples;
  const double chord_mid = 0.5 * (pts.front().y + pts.back().y);
  size_t apex = 0;
  double extreme = -1.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double dev = std::abs(pts[i].y - chord_mid);
    if (dev > extreme) {
      extreme = dev;
      apex = i;
    }
  }
  const double k = curv.samples[apex].y;
  if (k <= 0.0) throw FitError("apex radius: zero curvature at apex");
  return 1.0 / k;
}

/// kappa_r = R1 / R2 (indenter radius over fitted structure radius).
inline double curvature_ratio(double r1_mm, double r2_mm) {
  if (!(r1_mm > 0.0) || !(r2_mm > 0.0))
    throw InputError("curvature ratio: radii must be positive");
  return r1_mm / r2_mm;
}

// ---------------------------------------------------------------------------
// Centerline extraction
// ---------------------------------------------------------------------------

/// Collects nodes within `band` of line_y, groups them into x stations and at
/// each station regresses uy against y: slope -> e_yy, value at line_y -> v.
/// Stations with fewer than two distinct y values are dropped.
inline CenterlineProfile extract_centerline(const NodalDisplacementField& field, double line_y,
                                            double band) {
  if (field.node_xy.size() != field.uy.size())
    throw InputError("centerline: coordinate/displacement size mismatch");
  struct Entry {
    double x, y, uy;
  };
  std::vector<Entry> in_band;
  for (size_t i = 0; i < field.node_xy.size(); ++i)
    if (std::abs(field.node_xy[i].y - line_y) <= band)
      in_band.push_back({field.node_xy[i].x, field.node_xy[i].y, field.uy[i]});
  if (in_band.size() < 2)
    throw InputError("centerline: fewer than 2 nodes in the band around y=" +
                     std::to_string(line_y));
  std::sort(in_band.begin(), in_band.end(),
            [](const Entry& a, const Entry& b) { return a.x < b.x; });

  double span = in_band.back().x - in_band.front().x;
  const double xtol = std::max(1e-12, 1e-9 * std::max(span, 1.0));

  CenterlineProfile out;
  size_t i = 0;
  while (i < in_band.size()) {
    size_t j = i + 1;
    while (j < in_band.size() && in_band[j].x - in_band[i].x <= xtol) ++j;
    // station [i, j)
    double ymin = in_band[i].y, ymax = in_band[i].y;
    double sy = 0, syy = 0, su = 0, syu = 0;
    const int cnt = static_cast<int>(j - i);
    for (size_t k = i; k < j; ++k) {
      ymin = std::min(ymin, in_band[k].y);
      ymax = std::max(ymax, in_band[k].y);
      sy += in_band[k].y;
      syy += in_band[k].y * in_band[k].y;
      su += in_band[k].uy;
      syu += in_band[k].y * in_band[k].uy;
    }
    if (cnt >= 2 && ymax - ymin > 1e-12) {
      const double denom = cnt * syy - sy * sy;
      const double slope = (cnt * syu - sy * su) / denom;
      const double intercept = (su - slope * sy) / cnt;
      out.samples.push_back({in_band[i].x, slope, intercept + slope * line_y});
    }
    i = j;
  }
  if (out.samples.empty())
    throw InputError("centerline: no x station has two distinct y values in the band");
  return out;
}

// ---------------------------------------------------------------------------
// Force statistics
// ---------------------------------------------------------------------------

inline ForceStats force_stats(const std::vector<Vec2>& t_f) {
  if (t_f.size() < 2) throw InputError("force stats: need at least 2 samples");
  ForceStats s;
  double sum = 0.0;
  s.peak_n = t_f[0].y;
  s.t_peak_s = t_f[0].x;
  for (const auto& p : t_f) {
    sum += p.y;
    if (p.y > s.peak_n) {
      s.peak_n = p.y;
      s.t_peak_s = p.x;
    }
  }
  s.mean_n = sum / static_cast<double>(t_f.size());
  double ss = 0.0;
  for (const auto& p : t_f) ss += (p.y - s.mean_n) * (p.y - s.mean_n);
  s.sd_n = std::sqrt(ss / static_cast<double>(t_f.size() - 1));
  return s;
}

// ---------------------------------------------------------------------------
// CSV adapters
// ---------------------------------------------------------------------------

inline ContactProfile profile_from_csv(const csv::Table& t,
                                       ContactProfile::Source src = ContactProfile::Source::measured) {
  const int cx = t.column("x_mm"), cy = t.column("y_mm");
  if (cx < 0 || cy < 0) throw IngestError("profile csv: expected columns x_mm,y_mm");
  ContactProfile p;
  p.source = src;
  for (const auto& r : t.rows) p.samples.push_back({r[cx], r[cy]});
  p.validate();
  return p;
}

inline void profile_to_csv(const ContactProfile& p, std::ostream& out) {
  csv::Writer w(out);
  w.row({"x_mm", "y_mm"});
  for (const auto& s : p.samples) w.numeric_row({s.x, s.y});
}

inline void curvature_to_csv(const CurvatureProfile& c, std::ostream& out) {
  csv::Writer w(out);
  w.row({"x_mm", "k_per_mm"});
  for (const auto& s : c.samples) w.numeric_row({s.x, s.y});
}

inline void centerline_to_csv(const CenterlineProfile& c, std::ostream& out) {
  csv::Writer w(out);
  w.row({"x_mm", "eyy", "v_mm"});
  for (const auto& s : c.samples) w.numeric_row({s.x, s.eyy, s.v});
}

inline std::vector<Vec2> force_series_from_csv(const csv::Table& t) {
  const int ct = t.column("t_s"), cf = t.column("f_N");
  if (ct < 0 || cf < 0) throw IngestError("force csv: expected columns t_s,f_N");
  std::vector<Vec2> out;
  for (const auto& r : t.rows) out.push_back({r[ct], r[cf]});
  return out;
}

}  // namespace auxgrip
