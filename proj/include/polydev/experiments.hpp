#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "polydev/affine.hpp"
#include "polydev/deviation.hpp"
#include "polydev/hull.hpp"

namespace polydev {

/// One schedule point of the surface-area deficit study: hulls of n_points
/// boundary draws, averaged over independent trials, compared against the
/// limiting coefficient (target = deficit_coefficient(...).product).
struct DeficitResult {
  int n_points = 0;
  int trials = 0;
  double mean_deficit = 0.0;  // mean of H^{n-1}(dK) - H^{n-1}(dP_N)
  double std_error = 0.0;     // standard error of that mean over trials
  double normalized = 0.0;    // mean_deficit * N^{2/(n-1)}
  double target = 0.0;        // limiting value of `normalized` as N -> inf
  double ratio = 0.0;         // normalized / target
  int retried_trials = 0;     // trials whose hull was rebuilt with a fresh seed
  std::uint64_t seed = 0;
};

/// Mean surface-area deficit of random inscribed polytopes.  Each trial draws
/// n_points from `density` on the boundary, builds the hull, and records
/// H^{n-1}(dK) - H^{n-1}(dP).  A degenerate hull aborts the trial once and is
/// retried with a fresh derived seed; a second failure propagates.
/// Pass `target` to reuse a precomputed deficit coefficient (NaN = compute).
DeficitResult hull_deficit(
    const ConvexBody& body, const Density& density, int n_points, int trials,
    std::uint64_t seed = 1729, int workers = 1,
    double target = std::numeric_limits<double>::quiet_NaN());

/// hull_deficit across an increasing schedule of point counts; the ratio
/// column must trend toward 1 as N grows.
std::vector<DeficitResult> deficit_study(const ConvexBody& body,
                                         const Density& density,
                                         const std::vector<int>& schedule,
                                         int trials, std::uint64_t seed = 1729,
                                         int workers = 1);

/// One schedule point of the shrink-and-approximate construction: polytopes
/// inscribed in K, measured against the shrunken body (1-c)K.
struct ConstructionResult {
  int n_points = 0;
  int trials = 0;
  double shrink_c = 0.0;
  ShrinkMode shrink_mode_used = ShrinkMode::Auto;
  std::int64_t samples_per_trial = 0;
  std::uint64_t seed = 0;

  double mean_delta = 0.0;     // mean Delta_s((1-c)K, P_N) over trials
  double std_error = 0.0;      // standard error of that mean
  double mean_rescaled = 0.0;  // mean_delta * (1-c)^{-(n-1)}
  double min_delta = 0.0;      // best trial: the constructed witness
  int min_trial = -1;
  Polytope witness;            // hull realizing min_delta

  /// Per-trial r = rescaled Delta_s / (n * N^{-2/(n-1)} * as_n(K)^{2/(n-1)}
  /// * H^{n-1}(dK)); all finite and positive.
  std::vector<double> bound_ratios;
  double bound_ratio_max = 0.0;

  int origin_misses = 0;          // trials with 0 outside P_N (kept, logged)
  int decomposed_fallbacks = 0;   // deviation estimated by decomposed sweeps
  int short_hull_trials = 0;      // trials with fewer than n_points vertices
  int retried_trials = 0;         // hulls rebuilt once with a fresh seed
};

/// Runs the construction at a single point count: draw n_points from
/// `density`, hull, estimate Delta_s(body.scaled(1-c), P_N) by radial
/// coupling, rescale by (1-c)^{-(n-1)}, and record the minimum-deviation
/// witness together with per-trial bound ratios.
ConstructionResult run_construction(const ConvexBody& body,
                                    const Density& density, int n_points,
                                    int trials, ShrinkMode c_mode,
                                    std::uint64_t seed = 1729, int workers = 1,
                                    std::int64_t samples_per_trial = 100000);

/// Construction results across a schedule plus the fitted log-log exponent.
struct ScalingReport {
  std::string body_id;
  std::string density_kind;
  std::uint64_t seed = 0;
  std::vector<int> schedule;
  std::vector<ConstructionResult> per_n;

  double slope = 0.0;             // OLS on (log N, log mean_delta)
  double slope_half_width = 0.0;  // 95% confidence half-width
  double bound_ratio_max = 0.0;   // over every trial and schedule point
  double bound_trend = 0.0;       // Theil-Sen slope of per-N max r vs log N

  /// Deterministic serialization (witnesses omitted); identical seeds and
  /// parameters produce byte-identical strings for any worker count.
  std::string to_json() const;
};

/// run_construction per schedule point (>= 3 increasing counts spanning at
/// least a factor of 8) followed by the slope and bound-ratio trend fits.
ScalingReport scaling_study(const ConvexBody& body, const Density& density,
                            const std::vector<int>& schedule, int trials,
                            ShrinkMode c_mode, std::uint64_t seed = 1729,
                            int workers = 1,
                            std::int64_t samples_per_trial = 100000);

struct IdentityRow {
  std::string identity;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  bool all_pass() const;
};

/// Integral-geometric consistency suite for one body: the mixed
/// support/curvature boundary integral against the surface area, the
/// normal-map change of variables for five weights, the curvature-optimal
/// density normalization, the p = 0 affine surface area against n*vol, and
/// the ball values of as_p.  Deterministic quadrature rows use tolerance
/// 1e-6 (n = 2); Monte Carlo rows use 1% (n >= 3).
IdentityReport verify_identities(const ConvexBody& body,
                                 std::uint64_t seed = 1729);

/// Two-dimensional chord identity: the squared perimeter equals the integral
/// over lines (direction x signed distance) of |x_1 - x_2| weighted by the
/// inverse projected normals at the two boundary crossings.  Lines nearly
/// tangent (within 1e-6 * h_K of the support value) are excluded; their
/// contribution is folded into the 2% tolerance.
IdentityRow blaschke_petkantschin_2d(const ConvexBody& body,
                                     std::int64_t samples = 200000,
                                     std::uint64_t seed = 1729);

/// Least-squares slope of y on x; optionally the 95% confidence half-width
/// (Student t on k-2 degrees of freedom).
double ols_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* half_width_95 = nullptr);

/// Median of pairwise slopes; robust against a single outlying point.
double theil_sen_slope(const std::vector<double>& x,
                       const std::vector<double>& y);

}  // namespace polydev
