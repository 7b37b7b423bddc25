#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "polydev/common.hpp"

namespace polydev {

/// Unit vector in R^n.  The constructor normalizes, so every instance
/// satisfies ||u|| = 1 to within 1e-12.
class Direction {
 public:
  explicit Direction(Vector v);
  const Vector& coords() const { return u_; }
  int dim() const { return static_cast<int>(u_.size()); }

 private:
  Vector u_;
};

/// Boundary point of a smooth convex body together with the local data the
/// integrators need.  `normal` is the outer unit normal, `kappa` the
/// Gauss-Kronecker curvature (product of principal curvatures), `mean_curv`
/// the sum of principal curvatures divided by (n-1).
struct BoundaryPoint {
  Vector x;
  Vector normal;
  double support = 0.0;
  double kappa = 0.0;
  double mean_curv = 0.0;
};

/// Boundary point reached by the ray {t*v : t > 0} from the origin.
struct RadialSection {
  double rho = 0.0;  // distance from the origin to the boundary along v
  BoundaryPoint bp;
};

struct ValidationIssue {
  double theta;  // offending grid angle (2-D curves); NaN otherwise
  std::string what;
};

struct ValidationReport {
  bool valid = false;
  double min_support = 0.0;
  double min_kappa = 0.0;
  std::vector<ValidationIssue> issues;
};

/// Fourier coefficients of a 2-D support function
/// h(theta) = a0 + sum_k (a_k cos(k theta) + b_k sin(k theta)).
struct SupportCurveCoeffs {
  double a0 = 0.0;
  std::vector<std::array<double, 3>> harmonics;  // rows (k, a_k, b_k)
};

/// Smooth convex body with positive curvature containing the origin.
/// Instances are immutable values; all closed-form geometry lives here.
class ConvexBody {
 public:
  enum class Kind { Ball, Ellipsoid, SupportCurve };

  static ConvexBody ball(double radius, int n);
  static ConvexBody ellipsoid(std::vector<double> semi_axes);
  /// Throws contract_violation when h or h + h'' is nonpositive somewhere on
  /// the validation grid; the message lists the first failing angles.
  static ConvexBody support_curve(const SupportCurveCoeffs& coeffs);
  /// Same checks as support_curve, reported instead of thrown.
  static ValidationReport validate_curve(const SupportCurveCoeffs& coeffs);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::string describe() const;

  /// Support function h(u) = max_{x in K} <x, u>.
  double support(const Direction& u) const;

  /// Unique boundary point with outer normal u, with curvature data.
  BoundaryPoint boundary_point(const Direction& u) const;

  /// Boundary point hit by the ray from the origin through unit vector v.
  RadialSection radial_point(const Vector& unit_v) const;

  /// Membership test for scale * K.
  bool contains(const Vector& point, double scale = 1.0) const;

  ConvexBody scaled(double lambda) const;

  ValidationReport validate() const;

  /// Exact surface area / volume where a closed form exists.
  std::optional<double> closed_surface_area() const;
  std::optional<double> closed_volume() const;

  const std::vector<double>& semi_axes() const { return axes_; }
  const SupportCurveCoeffs& curve_coeffs() const { return coeffs_; }

  /// h, h', h'' of a 2-D support curve at angle theta (SupportCurve only).
  void curve_eval(double theta, double& h, double& hp, double& hpp) const;

 private:
  ConvexBody() = default;

  BoundaryPoint ellipsoid_point_from_x(const Vector& x) const;

  Kind kind_ = Kind::Ball;
  int dim_ = 0;
  double radius_ = 0.0;                // Ball
  std::vector<double> axes_;           // Ellipsoid
  SupportCurveCoeffs coeffs_;          // SupportCurve
  std::vector<double> grid_h_;         // cached support values on the grid
  double grid_h_max_ = 0.0;
  int grid_size_ = 0;
};

}  // namespace polydev
