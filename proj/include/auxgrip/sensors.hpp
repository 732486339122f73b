#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "auxgrip/common.hpp"
#include "auxgrip/csv.hpp"

namespace auxgrip {

// ---------------------------------------------------------------------------
// Strain-to-force conversion (instrumented cantilever beams at the ports)
// ---------------------------------------------------------------------------

struct BeamGaugeParams {
  double gauge_factor = 2.1;
  double youngs_modulus_pa = 3.30e9;  // acrylic beam
  double width_mm = 10.4;
  double height_mm = 1.57;
  double length_mm = 8.0;

  void validate() const {
    if (!(gauge_factor > 0 && youngs_modulus_pa > 0 && width_mm > 0 && height_mm > 0 &&
          length_mm > 0))
      throw ConfigError("gauge params: all values must be positive");
  }
  /// Certificate check for GFLA-3-350-50 gauges: 2.10 +- 1%.
  bool gauge_factor_within_certificate() const {
    return std::abs(gauge_factor - 2.10) <= 0.01 * 2.10 + 1e-12;
  }
};

enum class StrainConversionMode {
  direct,  // P = G * E * eps * b h^2 / (6 L), the rig's reduction convention
  bridge,  // quarter-bridge reduction: strain = reading / G first
};

/// Tip force of the instrumented cantilever from the measured microstrain.
inline double strain_to_force(double microstrain, const BeamGaugeParams& p,
                              StrainConversionMode mode = StrainConversionMode::direct) {
  p.validate();
  const double eps = microstrain * 1e-6;
  const double b = p.width_mm * 1e-3, h = p.height_mm * 1e-3, l = p.length_mm * 1e-3;
  const double base = p.youngs_modulus_pa * eps * b * h * h / (6.0 * l);
  return mode == StrainConversionMode::direct ? p.gauge_factor * base : base / p.gauge_factor;
}

// ---------------------------------------------------------------------------
// Measurement series ingestion
// ---------------------------------------------------------------------------

struct MeasurementRow {
  double t_s = 0.0;
  std::array<double, 3> eps_ue{};  // microstrain
  double contact_n = 0.0;          // contact channel, Newtons after calibration
};

struct MeasurementSeries {
  std::vector<MeasurementRow> rows;
  std::string label;

  void validate() const {
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].t_s < rows[i - 1].t_s)
        throw IngestError("series '" + label + "': time must be non-decreasing (row " +
                              std::to_string(i + 1) + ")",
                          static_cast<long>(i + 1));
  }

  /// (t, P_i) series for strain channel i in [0, 3).
  std::vector<Vec2> force_channel(int i, const BeamGaugeParams& p,
                                  StrainConversionMode mode = StrainConversionMode::direct) const {
    if (i < 0 || i > 2) throw InputError("force_channel: index must be 0..2");
    std::vector<Vec2> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({r.t_s, strain_to_force(r.eps_ue[i], p, mode)});
    return out;
  }
  std::vector<Vec2> contact_channel() const {
    std::vector<Vec2> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({r.t_s, r.contact_n});
    return out;
  }
};

struct CsvSchema {
  enum class FsrUnit { newtons, volts };
  FsrUnit fsr_unit = FsrUnit::newtons;
  // piecewise-linear volts -> N map; required when fsr_unit == volts
  std::vector<Vec2> fsr_calibration;

  double calibrate(double volts) const {
    if (fsr_calibration.size() < 2)
      throw IngestError("schema: FSR voltage data needs a calibration table (>= 2 points)");
    const auto& c = fsr_calibration;
    if (volts <= c.front().x)
      return c.front().y + (volts - c.front().x) * (c[1].y - c[0].y) / (c[1].x - c[0].x);
    for (size_t i = 1; i < c.size(); ++i)
      if (volts <= c[i].x)
        return c[i - 1].y +
               (volts - c[i - 1].x) * (c[i].y - c[i - 1].y) / (c[i].x - c[i - 1].x);
    const size_t n = c.size();
    return c[n - 2].y +
           (volts - c[n - 2].x) * (c[n - 1].y - c[n - 2].y) / (c[n - 1].x - c[n - 2].x);
  }
};

/// Parses the default schema "t_s,eps1_ue,eps2_ue,eps3_ue,fsr_N" (or fsr_V
/// with a calibration table).
inline MeasurementSeries load_series(std::istream& in, const CsvSchema& schema = {},
                                     const std::string& label = "") {
  const csv::Table t = csv::read_table(in, label.empty() ? "<series>" : label);
  const int ct = t.column("t_s");
  const int c1 = t.column("eps1_ue"), c2 = t.column("eps2_ue"), c3 = t.column("eps3_ue");
  const bool volts = schema.fsr_unit == CsvSchema::FsrUnit::volts;
  const int cf = t.column(volts ? "fsr_V" : "fsr_N");
  if (ct < 0 || c1 < 0 || c2 < 0 || c3 < 0 || cf < 0)
    throw IngestError("series '" + label + "': missing column; expected t_s,eps1_ue,eps2_ue," +
                      "eps3_ue," + (volts ? "fsr_V" : "fsr_N"));
  if (t.rows.empty()) throw IngestError("series '" + label + "': no data rows");
  MeasurementSeries s;
  s.label = label;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    MeasurementRow row;
    row.t_s = r[ct];
    row.eps_ue = {r[c1], r[c2], r[c3]};
    row.contact_n = volts ? schema.calibrate(r[cf]) : r[cf];
    s.rows.push_back(row);
  }
  s.validate();
  return s;
}

inline MeasurementSeries load_series_file(const std::string& path, const CsvSchema& schema = {},
                                          std::string label = "") {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  if (label.empty()) label = path;
  return load_series(in, schema, label);
}

// ---------------------------------------------------------------------------
// Polynomial least squares with confidence / prediction bands
// ---------------------------------------------------------------------------

struct FitResult {
  std::vector<double> coefficients;  // ascending degree, in the original x
  int n_points = 0;
  int dof = 0;  // N - (degree + 1)
  double rss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double level = 0.95;

  struct BandPoint {
    double x, y, fit, conf_lo, conf_hi, pred_lo, pred_hi;
  };
  std::vector<BandPoint> bands;  // one entry per input sample, in input order
};

/// Ordinary least squares polynomial fit with pointwise Student-t confidence
/// and prediction bands at the sample locations.
inline FitResult fit_with_bands(const std::vector<Vec2>& xy, int degree, double level = 0.95) {
  const int n = static_cast<int>(xy.size());
  const int p = degree + 1;
  if (degree < 0) throw FitError("fit: degree must be >= 0");
  if (!(level > 0.0 && level < 1.0)) throw FitError("fit: level must be in (0, 1)");
  if (n <= p) throw FitError("fit: need more than degree + 1 points (" + std::to_string(n) +
                             " given for degree " + std::to_string(degree) + ")");
  {
    std::vector<double> xs;
    xs.reserve(n);
    for (const auto& s : xy) xs.push_back(s.x);
    std::sort(xs.begin(), xs.end());
    int distinct = 1;
    for (int i = 1; i < n; ++i)
      if (xs[i] != xs[i - 1]) ++distinct;
    if (distinct < p)
      throw FitError("fit: rank-deficient design (only " + std::to_string(distinct) +
                     " distinct x values for degree " + std::to_string(degree) + ")");
  }

  // centered/scaled abscissa keeps the Vandermonde conditioned at high degree
  double xmin = xy[0].x, xmax = xy[0].x;
  for (const auto& s : xy) {
    xmin = std::min(xmin, s.x);
    xmax = std::max(xmax, s.x);
  }
  const double mx = 0.5 * (xmin + xmax);
  const double sx = std::max(0.5 * (xmax - xmin), 1e-300);

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double u = (xy[i].x - mx) / sx;
    double pow_u = 1.0;
    for (int j = 0; j < p; ++j) {
      design(i, j) = pow_u;
      pow_u *= u;
    }
    y[i] = xy[i].y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw FitError("fit: rank-deficient design matrix");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd yhat = design * beta;
  const Eigen::VectorXd resid = y - yhat;

  FitResult out;
  out.n_points = n;
  out.dof = n - p;
  out.level = level;
  out.rss = resid.squaredNorm();
  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  out.r2 = tss > 0.0 ? 1.0 - out.rss / tss : (out.rss <= 1e-30 ? 1.0 : 0.0);
  out.adj_r2 = 1.0 - (1.0 - out.r2) * (n - 1.0) / (n - p);

  // back-transform beta from u = (x - mx)/sx to plain x powers
  out.coefficients.assign(p, 0.0);
  {
    std::vector<double> shifted(p, 0.0);  // polynomial in (x - mx)
    for (int j = 0; j < p; ++j) {
      const double scale = beta[j] / std::pow(sx, j);
      shifted[j] += scale;
    }
    // expand (x - mx)^j via Horner-style shift
    std::vector<double> result(p, 0.0);
    for (int j = p - 1; j >= 0; --j) {
      for (int k = p - 1; k >= 1; --k) result[k] = result[k - 1] - mx * result[k];
      result[0] = shifted[j] - mx * result[0];
    }
    out.coefficients = result;
  }

  const double sigma2 = out.dof > 0 ? out.rss / out.dof : 0.0;
  const boost::math::students_t_distribution<double> dist(out.dof);
  const double tq = boost::math::quantile(dist, 0.5 + level / 2.0);

  // leverage h = v^T (X^T X)^{-1} v through the R factor
  const Eigen::MatrixXd rfac =
      qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::PermutationMatrix<Eigen::Dynamic> perm = qr.colsPermutation();
  out.bands.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = perm.transpose() * design.row(i).transpose();
    const Eigen::VectorXd w = rfac.transpose().triangularView<Eigen::Lower>().solve(v);
    const double h = w.squaredNorm();
    const double se_mean = std::sqrt(sigma2 * h);
    const double se_pred = std::sqrt(sigma2 * (1.0 + h));
    FitResult::BandPoint bp;
    bp.x = xy[i].x;
    bp.y = xy[i].y;
    bp.fit = yhat[i];
    bp.conf_lo = yhat[i] - tq * se_mean;
    bp.conf_hi = yhat[i] + tq * se_mean;
    bp.pred_lo = yhat[i] - tq * se_pred;
    bp.pred_hi = yhat[i] + tq * se_pred;
    out.bands.push_back(bp);
  }
  return out;
}

inline void fit_to_csv(const FitResult& fit, std::ostream& out) {
  csv::Writer w(out);
  w.row({"x", "y", "fit", "conf_lo", "conf_hi", "pred_lo", "pred_hi"});
  for (const auto& b : fit.bands)
    w.numeric_row({b.x, b.y, b.fit, b.conf_lo, b.conf_hi, b.pred_lo, b.pred_hi});
}

}  // namespace auxgrip
