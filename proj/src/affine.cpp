#include "polydev/affine.hpp"

#include <cmath>
#include <vector>

#include "polydev/hull.hpp"

namespace polydev {

namespace {

// Exponents (e1, e2) of kappa^{e1} / h^{e2}; p = +-infinity degenerates to
// the curvature-only measure with exponents (1, n).
void asp_exponents(int n, double p, double* e1, double* e2) {
  if (p == -static_cast<double>(n))
    throw contract_violation("p_affine_surface_area: p = -n is a pole");
  if (std::isinf(p)) {
    *e1 = 1;
    *e2 = n;
    return;
  }
  *e1 = p / (n + p);
  *e2 = n * (p - 1) / (n + p);
}

IntegralMethod precision_method(int dim, const AffinePrecision& prec,
                                std::uint64_t stream) {
  if (dim == 2) return IntegralMethod::quad2d(prec.nodes);
  IntegralMethod m = IntegralMethod::mc(prec.samples, prec.seed, stream);
  return m;
}

}  // namespace

MonteCarloEstimate p_affine_surface_area(const ConvexBody& body, double p,
                                         const AffinePrecision& prec) {
  const int n = body.dim();
  double e1 = 0, e2 = 0;
  asp_exponents(n, p, &e1, &e2);
  auto weight = [e1, e2](const BoundaryPoint& bp) {
    if (!(bp.support > 0))
      throw numerical_failure(
          "p_affine_surface_area: boundary point with non-positive support "
          "(origin must be interior)");
    return std::pow(bp.kappa, e1) / std::pow(bp.support, e2);
  };
  return boundary_integral(body, weight, precision_method(n, prec, 0xa5f0a5f));
}

MonteCarloEstimate affine_isoperimetric_ratio(const ConvexBody& body, double p,
                                              const AffinePrecision& prec) {
  if (!(p >= 0))
    throw contract_violation("affine_isoperimetric_ratio: requires p >= 0");
  const int n = body.dim();
  MonteCarloEstimate asp = p_affine_surface_area(body, p, prec);
  double vol = body_volume(body);
  double exponent = std::isinf(p) ? -1.0 : (n - p) / (n + p);
  double denom = sphere_surface(n) *
                 std::pow(vol / ball_volume(n), exponent);
  MonteCarloEstimate out = asp;
  out.value = asp.value / denom;
  out.std_error = asp.std_error / denom;
  return out;
}

double reitzner_constant(int n) {
  if (n < 2)
    throw contract_violation("reitzner_constant: dimension must be >= 2");
  double log_c = std::lgamma(n + 2.0 / (n - 1)) +
                 (n + 1.0) / (n - 1.0) * std::lgamma((n + 1) / 2.0) -
                 std::log(kPi) - std::log(n + 1.0) - std::lgamma(n - 1.0) -
                 std::lgamma((n - 1) / 2.0);
  return std::exp(log_c);
}

Density fn_density(const ConvexBody& body, const AffinePrecision& prec) {
  const int n = body.dim();
  double as_n = p_affine_surface_area(body, n, prec).value;
  if (!(as_n > 0))
    throw numerical_failure("fn_density: affine surface area came out non-positive");
  double half = (n - 1) / 2.0;
  auto pdf = [as_n, half](const BoundaryPoint& bp) {
    return std::sqrt(bp.kappa) / (as_n * std::pow(bp.support, half));
  };
  return Density::from_pdf(body, Density::Kind::AffineOptimal,
                           "curvature-optimal", pdf);
}

DeficitCoefficient deficit_coefficient(const ConvexBody& body,
                                       const Density& density,
                                       const AffinePrecision& prec) {
  const int n = body.dim();
  double inv = 1.0 / (n - 1);
  auto weight = [&density, inv](const BoundaryPoint& bp) {
    double f = density(bp);
    if (!(f > 0))
      throw numerical_failure("deficit_coefficient: density vanishes on the boundary");
    return std::pow(bp.kappa, inv) * std::pow(f, -2 * inv) * bp.mean_curv;
  };
  MonteCarloEstimate integral =
      boundary_integral(body, weight, precision_method(n, prec, 0xdef1c17));
  DeficitCoefficient out;
  out.c_n = reitzner_constant(n);
  out.integral = integral.value;
  out.integral_stderr = integral.std_error;
  out.product = out.c_n * integral.value;
  return out;
}

ShrinkFactor shrink_factor(const ConvexBody& body, const Density& density,
                           int n_points, ShrinkMode mode, std::uint64_t seed,
                           int pilot_trials, int workers,
                           const AffinePrecision& prec) {
  const int n = body.dim();
  if (n_points < n + 1)
    throw contract_violation("shrink_factor: need at least dim+1 points");
  ShrinkMode resolved = mode;
  if (mode == ShrinkMode::Auto)
    resolved = n_points <= 5000 ? ShrinkMode::Empirical : ShrinkMode::Asymptotic;

  double area = surface_area(body);
  ShrinkFactor out;
  out.mode_used = resolved;
  if (resolved == ShrinkMode::Asymptotic) {
    DeficitCoefficient coeff = deficit_coefficient(body, density, prec);
    out.c = std::pow(static_cast<double>(n_points), -2.0 / (n - 1)) *
            coeff.product / ((n - 1) * area);
  } else {
    if (pilot_trials < 2)
      throw contract_violation("shrink_factor: need at least 2 pilot trials");
    std::vector<double> areas(pilot_trials);
    parallel_for_indexed(pilot_trials, workers, [&](std::int64_t trial) {
      Rng rng(seed, derive_stream(0x5e11a9, static_cast<std::uint64_t>(n_points),
                                  static_cast<std::uint64_t>(trial)));
      std::vector<Vector> pts;
      pts.reserve(n_points);
      for (int i = 0; i < n_points; ++i)
        pts.push_back(sample_boundary(body, density, rng).x);
      areas[trial] = convex_hull(pts, n, seed).surface_area();
    });
    double mean = 0;
    for (double a : areas) mean += a;
    mean /= pilot_trials;
    double varsum = 0;
    for (double a : areas) varsum += (a - mean) * (a - mean);
    out.pilot_trials = pilot_trials;
    out.pilot_mean_area = mean;
    out.pilot_stderr = std::sqrt(varsum / (pilot_trials - 1.0) / pilot_trials);
    out.c = 1.0 - std::pow(mean / area, 1.0 / (n - 1));
  }
  if (!(out.c > 0 && out.c < 1))
    throw contract_violation(
        "shrink_factor: computed factor " + std::to_string(out.c) +
        " is outside (0, 1); the point count is too small for this body");
  return out;
}

}  // namespace polydev
