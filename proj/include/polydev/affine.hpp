#pragma once

#include "polydev/geometry.hpp"
#include "polydev/integrate.hpp"

namespace polydev {

/// Accuracy knobs shared by the affine-measure routines.  n = 2 bodies use
/// the periodic trapezoid rule with `nodes` points; n >= 3 bodies use Monte
/// Carlo with `samples` draws from (seed, a fixed stream).
struct AffinePrecision {
  std::int64_t samples = 2000000;
  int nodes = 4096;
  std::uint64_t seed = 1729;
};

/// Curvature-weighted boundary integral with exponents
///   kappa^{p/(n+p)} / <x, N(x)>^{n(p-1)/(n+p)},
/// p = +-infinity meaning exponents (1, n).  p = -n is a pole and rejected.
MonteCarloEstimate p_affine_surface_area(const ConvexBody& body, double p,
                                         const AffinePrecision& prec = {});

/// [as_p(K) / as_p(B)] / [vol(K) / vol(B)]^{(n-p)/(n+p)} for p >= 0; equals 1
/// exactly on ellipsoids, < 1 elsewhere (p > 0).
MonteCarloEstimate affine_isoperimetric_ratio(const ConvexBody& body, double p,
                                              const AffinePrecision& prec = {});

/// Dimensional constant in the expected deficit of random inscribed
/// polytopes,
///   Gamma(n + 2/(n-1)) * Gamma((n+1)/2)^{(n+1)/(n-1)}
///   / ( pi * (n+1) * (n-2)! * Gamma((n-1)/2) ).
double reitzner_constant(int n);

/// The sampling density minimizing the limiting deficit coefficient:
///   f(x) = kappa(x)^{1/2} / ( as_n(K) * <x, N(x)>^{(n-1)/2} ).
Density fn_density(const ConvexBody& body, const AffinePrecision& prec = {});

/// Limit of N^{2/(n-1)} * E[surface-area deficit] for N-point polytopes
/// sampled from `density`:  c_n * integral_boundary kappa^{1/(n-1)}
/// f^{-2/(n-1)} H dH  (H = average of the principal curvatures).
struct DeficitCoefficient {
  double c_n = 0;
  double integral = 0;
  double integral_stderr = 0;
  double product = 0;  // c_n * integral
};
DeficitCoefficient deficit_coefficient(const ConvexBody& body,
                                       const Density& density,
                                       const AffinePrecision& prec = {});

enum class ShrinkMode { Auto, Asymptotic, Empirical };

struct ShrinkFactor {
  double c = 0;
  ShrinkMode mode_used = ShrinkMode::Asymptotic;
  int pilot_trials = 0;        // Empirical only
  double pilot_mean_area = 0;  // Empirical only
  double pilot_stderr = 0;     // Empirical only
};

/// Shrink factor c such that (1-c)K is expected to fit inside the random
/// N-vertex polytope in the mean-surface-area sense.
///   Asymptotic: N^{-2/(n-1)} * deficit product / ((n-1) * area(K)).
///   Empirical:  1 - (mean pilot hull area / area(K))^{1/(n-1)}.
///   Auto: Empirical when N <= 5000, Asymptotic beyond.
/// Throws contract_violation unless the result lands in (0, 1).
ShrinkFactor shrink_factor(const ConvexBody& body, const Density& density,
                           int n_points, ShrinkMode mode = ShrinkMode::Auto,
                           std::uint64_t seed = 1729, int pilot_trials = 200,
                           int workers = 1,
                           const AffinePrecision& prec = {});

}  // namespace polydev
