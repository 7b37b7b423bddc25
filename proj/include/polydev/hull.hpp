#pragma once

#include <string>
#include <vector>

#include "polydev/common.hpp"
#include "polydev/rng.hpp"

namespace polydev {

/// Input whose affine hull has dimension < n, so no full-dimensional hull
/// exists (also raised when predicates stay inconsistent after the jitter
/// retry).
class degenerate_hull_error : public numerical_failure {
 public:
  using numerical_failure::numerical_failure;
};

struct PolytopeFacet {
  std::vector<int> vertex_ids;  // n indices into Polytope::vertices
  Vector normal;                // outward unit normal
  double offset;                // facet plane is <normal, x> = offset
  double measure;               // (n-1)-dimensional simplex measure
  std::vector<int> neighbors;   // neighbors[i] shares the ridge omitting vertex_ids[i]
};

/// Simplicial convex polytope produced by convex_hull (or loaded from JSON).
struct Polytope {
  int dim = 0;
  std::vector<Vector> vertices;
  std::vector<PolytopeFacet> facets;
  Vector interior_point;  // vertex centroid

  double surface_area() const;  // sum of facet measures
  double volume() const;        // fan decomposition from interior_point
  /// halfspace test against every facet, tolerance relative to the
  /// coordinate scale
  bool contains(const Vector& p, double rel_tol = 1e-12) const;
  double coordinate_scale() const;
  /// Ridge closure (every (n-2)-face shared by exactly two facets) and index
  /// sanity; throws numerical_failure on violation.
  void check_combinatorics() const;
};

/// Convex hull via randomized incremental insertion with conflict lists
/// (quickhull-style farthest-point ordering).  2 <= dim <= 5.  `seed` drives
/// only the deterministic jitter used for a single retry when the float
/// predicates cascade into an inconsistent horizon.
Polytope convex_hull(const std::vector<Vector>& points, int dim,
                     std::uint64_t seed = 0);

/// Uniform point on a facet (symmetric Dirichlet barycentric weights).
Vector sample_on_facet(const Polytope& poly, int facet_id, Rng& rng);

/// Uniform point in the polytope (fan simplex picked by volume).
Vector sample_in_polytope(const Polytope& poly, Rng& rng);

std::string polytope_to_json(const Polytope& poly);
Polytope polytope_from_json(const std::string& text);

}  // namespace polydev
