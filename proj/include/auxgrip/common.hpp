#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace auxgrip {

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double rad) {
  double a = std::remainder(rad, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }

  double norm() const { return std::hypot(x, y); }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }

  Vec2 normalized() const {
    const double n = norm();
    return {x / n, y / n};
  }
  Vec2 rotated(double rad) const {
    const double c = std::cos(rad), s = std::sin(rad);
    return {c * x - s * y, s * x + c * y};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// ---------------------------------------------------------------------------
// Error hierarchy. Construction/config problems, solver failures and data
// ingestion problems are kept distinct so callers can react per category.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration value.
struct ConfigError : Error {
  using Error::Error;
};

/// Geometrically impossible construction (intersecting struts, arch shorter
/// than its chord, disconnected tiling).
struct GeometryError : Error {
  using Error::Error;
};

/// Singular or rank-deficient linear system.
struct SolverError : Error {
  using Error::Error;
};

/// Nonlinear iteration failed; carries the last converged load factor.
struct ConvergenceError : Error {
  double last_load_factor;
  double residual_norm;
  ConvergenceError(const std::string& msg, double load_factor, double residual)
      : Error(msg), last_load_factor(load_factor), residual_norm(residual) {}
};

/// Invalid argument to an analysis operation.
struct InputError : Error {
  using Error::Error;
};

/// Least-squares fit could not be performed (degenerate design).
struct FitError : Error {
  using Error::Error;
};

/// Mechanism evaluated at (or numerically too close to) a singular pose.
struct SingularityError : Error {
  using Error::Error;
};

/// Malformed measurement file; carries the 1-based line number when known.
struct IngestError : Error {
  long line = -1;
  explicit IngestError(const std::string& msg, long line_no = -1)
      : Error(msg), line(line_no) {}
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace auxgrip
