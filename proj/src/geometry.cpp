#include "polydev/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace polydev {

namespace {

constexpr int kMinDim = 2;
constexpr int kMaxDim = 5;
constexpr int kCurveGridMin = 4096;

double wrap_angle(double a) {
  // into (-pi, pi]
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

}  // namespace

Direction::Direction(Vector v) {
  if (v.size() < kMinDim)
    throw contract_violation("Direction: dimension must be >= 2");
  double norm = v.norm();
  if (!(norm > 1e-14) || !std::isfinite(norm))
    throw contract_violation("Direction: vector is zero or not finite");
  u_ = v / norm;
}

ConvexBody ConvexBody::ball(double radius, int n) {
  if (!(radius > 0.0)) throw contract_violation("ball: radius must be positive");
  if (n < kMinDim || n > kMaxDim)
    throw contract_violation("ball: dimension must be in [2, 5]");
  ConvexBody b;
  b.kind_ = Kind::Ball;
  b.dim_ = n;
  b.radius_ = radius;
  return b;
}

ConvexBody ConvexBody::ellipsoid(std::vector<double> semi_axes) {
  int n = static_cast<int>(semi_axes.size());
  if (n < kMinDim || n > kMaxDim)
    throw contract_violation("ellipsoid: need between 2 and 5 semi-axes");
  for (double a : semi_axes)
    if (!(a > 0.0) || !std::isfinite(a))
      throw contract_violation("ellipsoid: semi-axes must be positive");
  ConvexBody b;
  b.kind_ = Kind::Ellipsoid;
  b.dim_ = n;
  b.axes_ = std::move(semi_axes);
  return b;
}

ValidationReport ConvexBody::validate_curve(const SupportCurveCoeffs& coeffs) {
  ValidationReport report;
  int kmax = 0;
  for (const auto& row : coeffs.harmonics) {
    int k = static_cast<int>(row[0]);
    if (k < 1 || row[0] != static_cast<double>(k)) {
      report.issues.push_back({std::nan(""), "harmonic order must be a positive integer"});
      return report;
    }
    kmax = std::max(kmax, k);
  }
  int grid = std::max(kCurveGridMin, 16 * kmax);
  double min_h = std::numeric_limits<double>::infinity();
  double max_radius_of_curv = 0.0;
  for (int i = 0; i < grid; ++i) {
    double theta = 2.0 * kPi * i / grid;
    double h = coeffs.a0, hpp = 0.0;
    for (const auto& row : coeffs.harmonics) {
      double k = row[0];
      double c = std::cos(k * theta), s = std::sin(k * theta);
      h += row[1] * c + row[2] * s;
      hpp += -k * k * (row[1] * c + row[2] * s);
    }
    double roc = h + hpp;  // radius of curvature 1/kappa
    if (!(h > 0.0))
      report.issues.push_back({theta, "support function not positive"});
    if (!(roc > 0.0))
      report.issues.push_back({theta, "h + h'' not positive (curve not strictly convex)"});
    min_h = std::min(min_h, h);
    max_radius_of_curv = std::max(max_radius_of_curv, roc);
  }
  report.valid = report.issues.empty();
  report.min_support = min_h;
  report.min_kappa = max_radius_of_curv > 0.0 ? 1.0 / max_radius_of_curv : 0.0;
  return report;
}

ConvexBody ConvexBody::support_curve(const SupportCurveCoeffs& coeffs) {
  ValidationReport report = validate_curve(coeffs);
  if (!report.valid) {
    std::ostringstream msg;
    msg << "support_curve: invalid coefficients;";
    size_t shown = 0;
    for (const auto& issue : report.issues) {
      if (shown++ == 4) {
        msg << " ... (" << report.issues.size() << " issues total)";
        break;
      }
      msg << " [theta=" << issue.theta << ": " << issue.what << "]";
    }
    throw contract_violation(msg.str());
  }
  ConvexBody b;
  b.kind_ = Kind::SupportCurve;
  b.dim_ = 2;
  b.coeffs_ = coeffs;
  int kmax = 0;
  for (const auto& row : coeffs.harmonics) kmax = std::max(kmax, static_cast<int>(row[0]));
  b.grid_size_ = std::max(kCurveGridMin, 16 * kmax);
  b.grid_h_.resize(b.grid_size_);
  b.grid_h_max_ = 0.0;
  for (int i = 0; i < b.grid_size_; ++i) {
    double h, hp, hpp;
    b.curve_eval(2.0 * kPi * i / b.grid_size_, h, hp, hpp);
    b.grid_h_[i] = h;
    b.grid_h_max_ = std::max(b.grid_h_max_, h);
  }
  return b;
}

std::string ConvexBody::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case Kind::Ball:
      s << "ball(r=" << radius_ << ", n=" << dim_ << ")";
      break;
    case Kind::Ellipsoid: {
      s << "ellipsoid(";
      for (size_t i = 0; i < axes_.size(); ++i) s << (i ? "," : "") << axes_[i];
      s << ")";
      break;
    }
    case Kind::SupportCurve:
      s << "curve2d(a0=" << coeffs_.a0 << ", " << coeffs_.harmonics.size()
        << " harmonics)";
      break;
  }
  return s.str();
}

void ConvexBody::curve_eval(double theta, double& h, double& hp, double& hpp) const {
  h = coeffs_.a0;
  hp = 0.0;
  hpp = 0.0;
  for (const auto& row : coeffs_.harmonics) {
    double k = row[0];
    double c = std::cos(k * theta), s = std::sin(k * theta);
    h += row[1] * c + row[2] * s;
    hp += k * (-row[1] * s + row[2] * c);
    hpp += -k * k * (row[1] * c + row[2] * s);
  }
}

double ConvexBody::support(const Direction& u) const {
  if (u.dim() != dim_)
    throw contract_violation("support: direction dimension mismatch");
  const Vector& v = u.coords();
  switch (kind_) {
    case Kind::Ball:
      return radius_;
    case Kind::Ellipsoid: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += axes_[i] * axes_[i] * v[i] * v[i];
      return std::sqrt(s);
    }
    case Kind::SupportCurve: {
      double h, hp, hpp;
      curve_eval(std::atan2(v[1], v[0]), h, hp, hpp);
      return h;
    }
  }
  return 0.0;
}

BoundaryPoint ConvexBody::ellipsoid_point_from_x(const Vector& x) const {
  // Level set F(y) = sum y_i^2/a_i^2 = 1.  With g = |grad F|/2 the outer
  // normal is (x_i/a_i^2)/g and the Weingarten trace over the tangent space
  // is (tr M - n^T M n) with M = diag(1/a_i^2)/g.
  BoundaryPoint bp;
  bp.x = x;
  int n = dim_;
  double g2 = 0.0, prod_a2 = 1.0, tr = 0.0;
  Vector grad(n);
  for (int i = 0; i < n; ++i) {
    double a2 = axes_[i] * axes_[i];
    grad[i] = x[i] / a2;
    g2 += grad[i] * grad[i];
    prod_a2 *= a2;
    tr += 1.0 / a2;
  }
  double g = std::sqrt(g2);
  bp.normal = grad / g;
  bp.support = bp.x.dot(bp.normal);
  bp.kappa = 1.0 / (prod_a2 * std::pow(g2, 0.5 * (n + 1)));
  double nMn = 0.0;
  for (int i = 0; i < n; ++i)
    nMn += bp.normal[i] * bp.normal[i] / (axes_[i] * axes_[i]);
  bp.mean_curv = (tr - nMn) / (g * (n - 1));
  return bp;
}

BoundaryPoint ConvexBody::boundary_point(const Direction& u) const {
  if (u.dim() != dim_)
    throw contract_violation("boundary_point: direction dimension mismatch");
  const Vector& v = u.coords();
  switch (kind_) {
    case Kind::Ball: {
      BoundaryPoint bp;
      bp.x = radius_ * v;
      bp.normal = v;
      bp.support = radius_;
      bp.kappa = std::pow(radius_, -(dim_ - 1));
      bp.mean_curv = 1.0 / radius_;
      return bp;
    }
    case Kind::Ellipsoid: {
      double h = support(u);
      Vector x(dim_);
      for (int i = 0; i < dim_; ++i) x[i] = axes_[i] * axes_[i] * v[i] / h;
      BoundaryPoint bp = ellipsoid_point_from_x(x);
      bp.normal = v;  // analytically equal; avoids round-trip noise
      bp.support = h;
      return bp;
    }
    case Kind::SupportCurve: {
      double theta = std::atan2(v[1], v[0]);
      double h, hp, hpp;
      curve_eval(theta, h, hp, hpp);
      BoundaryPoint bp;
      bp.x = Vector(2);
      bp.x[0] = h * v[0] - hp * v[1];
      bp.x[1] = h * v[1] + hp * v[0];
      bp.normal = v;
      bp.support = h;
      bp.kappa = 1.0 / (h + hpp);
      bp.mean_curv = bp.kappa;
      return bp;
    }
  }
  throw contract_violation("boundary_point: unknown body kind");
}

RadialSection ConvexBody::radial_point(const Vector& v) const {
  if (v.size() != dim_)
    throw contract_violation("radial_point: direction dimension mismatch");
  RadialSection rs;
  switch (kind_) {
    case Kind::Ball: {
      rs.rho = radius_;
      rs.bp = boundary_point(Direction(v));
      return rs;
    }
    case Kind::Ellipsoid: {
      double q = 0.0;
      for (int i = 0; i < dim_; ++i) q += v[i] * v[i] / (axes_[i] * axes_[i]);
      rs.rho = 1.0 / std::sqrt(q);
      rs.bp = ellipsoid_point_from_x(rs.rho * v);
      return rs;
    }
    case Kind::SupportCurve: {
      // Find the normal angle tau whose boundary point lies on the ray.
      // psi(tau) = angle of x(tau) is strictly increasing and satisfies
      // |psi - tau| < pi/2, so [phi - pi/2, phi + pi/2] brackets the root.
      double phi = std::atan2(v[1], v[0]);
      double lo = phi - 0.5 * kPi, hi = phi + 0.5 * kPi;
      double h, hp, hpp;
      auto angle_gap = [&](double tau) {
        curve_eval(tau, h, hp, hpp);
        double c = std::cos(tau), s = std::sin(tau);
        double px = h * c - hp * s;
        double py = h * s + hp * c;
        return wrap_angle(std::atan2(py, px) - phi);
      };
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (angle_gap(mid) < 0.0)
          lo = mid;
        else
          hi = mid;
        if (hi - lo < 1e-15) break;
      }
      double tau = 0.5 * (lo + hi);
      Vector u(2);
      u[0] = std::cos(tau);
      u[1] = std::sin(tau);
      rs.bp = boundary_point(Direction(u));
      rs.rho = rs.bp.x.norm();
      return rs;
    }
  }
  throw contract_violation("radial_point: unknown body kind");
}

bool ConvexBody::contains(const Vector& p, double scale) const {
  if (!(scale > 0.0)) throw contract_violation("contains: scale must be positive");
  if (p.size() != dim_)
    throw contract_violation("contains: point dimension mismatch");
  switch (kind_) {
    case Kind::Ball:
      return p.norm() <= scale * radius_ * (1.0 + 1e-12);
    case Kind::Ellipsoid: {
      double q = 0.0;
      for (int i = 0; i < dim_; ++i) {
        double t = p[i] / (scale * axes_[i]);
        q += t * t;
      }
      return q <= 1.0 + 1e-12;
    }
    case Kind::SupportCurve: {
      // max over the support grid of <p, u(theta)> - scale*h(theta)
      double tol = 1e-9 * scale * grid_h_max_;
      for (int i = 0; i < grid_size_; ++i) {
        double theta = 2.0 * kPi * i / grid_size_;
        double dot = p[0] * std::cos(theta) + p[1] * std::sin(theta);
        if (dot - scale * grid_h_[i] > tol) return false;
      }
      return true;
    }
  }
  return false;
}

ConvexBody ConvexBody::scaled(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw contract_violation("scaled: factor must be positive and finite");
  switch (kind_) {
    case Kind::Ball:
      return ball(lambda * radius_, dim_);
    case Kind::Ellipsoid: {
      std::vector<double> axes = axes_;
      for (double& a : axes) a *= lambda;
      return ellipsoid(std::move(axes));
    }
    case Kind::SupportCurve: {
      SupportCurveCoeffs c = coeffs_;
      c.a0 *= lambda;
      for (auto& row : c.harmonics) {
        row[1] *= lambda;
        row[2] *= lambda;
      }
      return support_curve(c);
    }
  }
  throw contract_violation("scaled: unknown body kind");
}

ValidationReport ConvexBody::validate() const {
  switch (kind_) {
    case Kind::Ball: {
      ValidationReport r;
      r.valid = true;
      r.min_support = radius_;
      r.min_kappa = std::pow(radius_, -(dim_ - 1));
      return r;
    }
    case Kind::Ellipsoid: {
      ValidationReport r;
      r.valid = true;
      double amin = *std::min_element(axes_.begin(), axes_.end());
      r.min_support = amin;
      // curvature is minimal at the tip of the longest axis
      int j = 0;
      for (size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i] > axes_[j]) j = static_cast<int>(i);
      Vector x = Vector::Zero(dim_);
      x[j] = axes_[j];
      r.min_kappa = ellipsoid_point_from_x(x).kappa;
      return r;
    }
    case Kind::SupportCurve:
      return validate_curve(coeffs_);
  }
  throw contract_violation("validate: unknown body kind");
}

std::optional<double> ConvexBody::closed_surface_area() const {
  switch (kind_) {
    case Kind::Ball:
      return sphere_surface(dim_) * std::pow(radius_, dim_ - 1);
    case Kind::SupportCurve:
      // integral of (h + h'') dtheta; the harmonics integrate to zero
      return 2.0 * kPi * coeffs_.a0;
    default:
      return std::nullopt;
  }
}

std::optional<double> ConvexBody::closed_volume() const {
  switch (kind_) {
    case Kind::Ball:
      return ball_volume(dim_) * std::pow(radius_, dim_);
    case Kind::Ellipsoid: {
      double v = ball_volume(dim_);
      for (double a : axes_) v *= a;
      return v;
    }
    case Kind::SupportCurve: {
      // (1/2) int h (h + h'') dtheta, exact in the Fourier coefficients
      double s = 2.0 * kPi * coeffs_.a0 * coeffs_.a0;
      for (const auto& row : coeffs_.harmonics) {
        double k = row[0];
        s += kPi * (row[1] * row[1] + row[2] * row[2]) * (1.0 - k * k);
      }
      return 0.5 * s;
    }
  }
  return std::nullopt;
}

}  // namespace polydev
