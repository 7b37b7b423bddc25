#pragma once

#include <optional>
#include <string>

#include "polydev/geometry.hpp"
#include "polydev/hull.hpp"
#include "polydev/integrate.hpp"

namespace polydev {

/// O(sqrt(F)) radial function of a polytope around an interior origin.
///
/// rho_P(v) = min over facets of offset / <normal, v>.  The minimum is found
/// by maximizing <normal, v> / offset over the facet adjacency graph, which
/// is the vertex graph of the polar polytope: a simple polytope, so greedy
/// ascent cannot stop at a non-optimal facet.  A sqrt(F)-sized landmark scan
/// warm-starts the climb.
class RadialPolytope {
 public:
  /// Throws contract_violation when the origin is not safely interior.
  explicit RadialPolytope(const Polytope& poly);

  double radial(const Vector& unit_v, int* facet_id = nullptr) const;
  const Polytope& poly() const { return *poly_; }
  double min_offset() const { return min_offset_; }

 private:
  const Polytope* poly_;
  std::vector<int> landmarks_;
  double min_offset_ = 0;
};

enum class DeviationMethod {
  Auto,            // RadialCoupling, falling back when the origin is outside P
  RadialCoupling,  // one sphere sweep, pointwise-small coupled integrand
  Decomposed,      // independent sweeps over each boundary
};

/// The four boundary pieces whose signed sum is the surface-area deviation:
/// H(bd K \ P) + H(bd P \ K) - H(bd K cap P) - H(bd P cap K).
struct DeviationParts {
  double body_outside = 0;
  double poly_outside = 0;
  double body_inside = 0;
  double poly_inside = 0;
};

struct DeviationEstimate {
  MonteCarloEstimate delta;
  DeviationParts parts;
  DeviationParts parts_stderr;
  DeviationMethod method_used = DeviationMethod::RadialCoupling;
  std::string note;  // non-empty when Auto had to fall back
};

/// Surface-area deviation between a smooth body and a polytope.
///
/// Both estimators share the error policy: the standard error must come in
/// under max(0.02 |delta|, 1e-4 * area(body)) or numerical_failure is
/// thrown, since a deviation estimate drowned in its own noise is worthless
/// for the scaling experiments downstream.
DeviationEstimate surface_deviation(const ConvexBody& body,
                                    const Polytope& poly,
                                    std::int64_t samples = 200000,
                                    std::uint64_t seed = 1729,
                                    std::uint64_t stream = 0xdead1a1,
                                    DeviationMethod method = DeviationMethod::Auto);

struct VolumeDeviationEstimate {
  MonteCarloEstimate delta;
  double body_part = 0;  // vol(K \ P)
  double body_part_stderr = 0;
  double poly_part = 0;  // vol(P \ K)
  double poly_part_stderr = 0;
};

/// vol(K u P) - vol(K cap P), by uniform sampling in each body (`samples`
/// draws per side).
VolumeDeviationEstimate volume_deviation(const ConvexBody& body,
                                         const Polytope& poly,
                                         std::int64_t samples = 200000,
                                         std::uint64_t seed = 1729,
                                         std::uint64_t stream = 0xb01a7e);

}  // namespace polydev
