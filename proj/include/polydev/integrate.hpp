#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "polydev/geometry.hpp"
#include "polydev/rng.hpp"

namespace polydev {

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// How to evaluate a boundary integral.
///
/// Two parametrizations of the boundary are available: the normal map
/// (directions weighted by 1/kappa; the spherical image of dH) and the radial
/// map around the origin (weighted by rho^{n-1}/<N, v>).  Each can be driven
/// by Monte Carlo over uniform directions or by a deterministic rule:
/// periodic trapezoid for n = 2, Gauss-Legendre x trapezoid product rule on
/// the sphere for n = 3.
struct IntegralMethod {
  enum class Param { NormalMap, Radial };
  enum class Scheme { MonteCarlo, Deterministic };

  Param param = Param::NormalMap;
  Scheme scheme = Scheme::MonteCarlo;
  std::int64_t samples = 200000;  // Monte Carlo sample count
  int nodes = 4096;               // deterministic rule resolution
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  static IntegralMethod mc(std::int64_t samples, std::uint64_t seed,
                           std::uint64_t stream = 0x1317e6);
  static IntegralMethod quad2d(int nodes = 4096);
  static IntegralMethod radial_mc(std::int64_t samples, std::uint64_t seed,
                                  std::uint64_t stream = 0x21ad1a);
  static IntegralMethod radial_quad2d(int nodes = 4096);
  static IntegralMethod sphere_quad3d(int polar_nodes = 128);
  static IntegralMethod radial_sphere_quad3d(int polar_nodes = 128);

  /// Default per the module contract: deterministic quadrature for n = 2,
  /// Monte Carlo otherwise.
  static IntegralMethod standard(int dim, std::uint64_t seed);
};

using BoundaryWeight = std::function<double(const BoundaryPoint&)>;

/// integral over the boundary of `body` of w(x) dH^{n-1}(x).
MonteCarloEstimate boundary_integral(const ConvexBody& body,
                                     const BoundaryWeight& w,
                                     const IntegralMethod& method);

/// integral over S^{n-1} of g(u) dsigma(u), deterministic (n = 2: trapezoid,
/// n = 3: product rule).  Used for change-of-variables cross-checks.
double sphere_integral_det(int dim, const std::function<double(const Vector&)>& g,
                           int nodes = 2048);

/// H^{n-1}(boundary of K).  Closed forms where available, deterministic
/// quadrature for n in {2, 3}, fixed-seed Monte Carlo above.
double surface_area(const ConvexBody& body);

/// Lebesgue volume of K (closed forms for the whole catalogue).
double body_volume(const ConvexBody& body);

/// Uniform direction on S^{n-1}.
Vector sample_unit_sphere(int dim, Rng& rng);

/// Deterministic quasi-uniform direction set used to probe densities:
/// equal angles for n = 2, Halton-driven Gaussians for n >= 3.
std::vector<Vector> probe_directions(int dim, int count);

/// Normalized probability density with respect to dH^{n-1} on the boundary,
/// carrying the rejection envelope sup f/kappa used by sample_boundary.
class Density {
 public:
  enum class Kind { Uniform, AffineOptimal, Custom };

  static Density uniform(const ConvexBody& body);
  /// Weight w(direction) > 0, normalized internally (2-D bodies).
  static Density custom_weight(const ConvexBody& body,
                               std::function<double(double)> weight_of_theta,
                               std::string label);
  /// Wraps an externally normalized pdf (used for the curvature-optimal
  /// density, whose normalizer is an affine surface area).
  static Density from_pdf(const ConvexBody& body, Kind kind, std::string label,
                          std::function<double(const BoundaryPoint&)> pdf);

  double operator()(const BoundaryPoint& bp) const { return pdf_(bp); }
  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  /// M with sup_x f(x)/kappa(x) <= M; acceptance ratio is f/(M kappa).
  double envelope() const { return envelope_; }
  const ConvexBody& body() const { return body_; }

 private:
  Density(ConvexBody body, Kind kind, std::string label,
          std::function<double(const BoundaryPoint&)> pdf);

  ConvexBody body_;
  Kind kind_;
  std::string label_;
  std::function<double(const BoundaryPoint&)> pdf_;
  double envelope_ = 0.0;
};

/// Draws a boundary point with law `f` by rejection from the normal-map
/// proposal (uniform directions).  Throws numerical_failure if the envelope
/// is ever exceeded or acceptance stalls.
BoundaryPoint sample_boundary(const ConvexBody& body, const Density& f, Rng& rng);

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace polydev
