#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "polydev/affine.hpp"
#include "polydev/geometry.hpp"
#include "polydev/integrate.hpp"

using namespace polydev;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
// Perimeter of the ellipse with axes (2, 1), from the complete elliptic
// integral of the second kind.
const double kEllipsePerimeter = 9.6884482205476762;

ConvexBody wavy_curve() {
  SupportCurveCoeffs c;
  c.a0 = 1.0;
  c.harmonics.push_back({3, 0.1, 0.0});
  return ConvexBody::support_curve(c);
}

// Closed-form support data of the wavy curve, h(t) = 1 + 0.1 cos(3t),
// evaluated directly so the integral oracles below share no code with the
// library's boundary machinery.
double wavy_h(double t) { return 1 + 0.1 * std::cos(3 * t); }
double wavy_hpp(double t) { return -0.9 * std::cos(3 * t); }

// Boundary integral of kappa^{e1} h^{-e2} over a support curve via Simpson's
// rule on the normal angle (ds = (h + h'') dt).
double curve_asp_oracle(double e1, double e2) {
  return oracles::simpson(
      [&](double t) {
        double h = wavy_h(t);
        double r = h + wavy_hpp(t);  // 1/kappa
        return std::pow(r, 1 - e1) * std::pow(h, -e2);
      },
      0, 2 * kPi, 20000);
}

}  // namespace

TEST_CASE("deficit constant: frozen low-dimensional values and identities") {
  CHECK(reitzner_constant(2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(reitzner_constant(3) == doctest::Approx(3 / (2 * kPi)).epsilon(1e-14));
  // Combinations that appear as normalized deficit targets later on.
  double w2 = sphere_surface(2), w3 = sphere_surface(3);
  CHECK(reitzner_constant(2) * w2 * w2 * w2 ==
        doctest::Approx(2 * kPi * kPi * kPi).epsilon(1e-13));
  CHECK(reitzner_constant(3) * w3 * w3 ==
        doctest::Approx(24 * kPi).epsilon(1e-13));
  for (int n = 4; n <= 6; ++n) {
    CHECK(reitzner_constant(n) > 0);
    CHECK(std::isfinite(reitzner_constant(n)));
  }
  CHECK_THROWS_AS(reitzner_constant(1), contract_violation);
}

TEST_CASE("balls: as_p is the sphere area times a radius power") {
  // as_p(rB) = omega_n * r^{n(n-p)/(n+p)}.
  for (double p : {-1.0, 0.0, 1.0, 2.0, 3.0, 10.0, kInf, -kInf}) {
    double r = 2.0;
    ConvexBody b2 = ConvexBody::ball(r, 2);
    double expo2 = std::isinf(p) ? -2.0 : 2 * (2 - p) / (2 + p);
    CHECK(p_affine_surface_area(b2, p).value ==
          doctest::Approx(sphere_surface(2) * std::pow(r, expo2)).epsilon(1e-12));

    ConvexBody b3 = ConvexBody::ball(r, 3);
    double expo3 = std::isinf(p) ? -3.0 : 3 * (3 - p) / (3 + p);
    // The Monte Carlo integrand is constant on a ball, so this is exact up
    // to accumulation error.
    CHECK(p_affine_surface_area(b3, p).value ==
          doctest::Approx(sphere_surface(3) * std::pow(r, expo3)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(p_affine_surface_area(ConvexBody::ball(1, 2), -2.0),
                  contract_violation);
  CHECK_THROWS_AS(p_affine_surface_area(ConvexBody::ball(1, 3), -3.0),
                  contract_violation);
}

TEST_CASE("p = 0 reduces to n times the volume") {
  ConvexBody wavy = wavy_curve();
  CHECK(p_affine_surface_area(wavy, 0).value ==
        doctest::Approx(2 * *wavy.closed_volume()).epsilon(1e-10));

  ConvexBody ell = ConvexBody::ellipsoid({1.5, 1.0, 0.75});
  MonteCarloEstimate est = p_affine_surface_area(ell, 0);
  CHECK(est.value == doctest::Approx(3 * *ell.closed_volume()).epsilon(0.005));
  CHECK(est.std_error < 0.01 * est.value);
}

TEST_CASE("ellipses: affine covariance fixes as_1 and as_n in closed form") {
  ConvexBody e21 = ConvexBody::ellipsoid({2.0, 1.0});
  // as_1 is invariant under volume-preserving linear maps and scales like
  // lambda^{n(n-1)/(n+1)}; the (2,1) ellipse is sqrt(2) times a rotated
  // unit-volume image of the disc, giving 2 pi 2^{1/3}.
  CHECK(p_affine_surface_area(e21, 1).value ==
        doctest::Approx(2 * kPi * std::cbrt(2.0)).epsilon(1e-11));
  // as_n is fully affine-invariant, so every ellipse matches the circle.
  CHECK(p_affine_surface_area(e21, 2).value ==
        doctest::Approx(2 * kPi).epsilon(1e-11));
  ConvexBody e35 = ConvexBody::ellipsoid({3.0, 0.5});
  CHECK(p_affine_surface_area(e35, 2).value ==
        doctest::Approx(2 * kPi).epsilon(1e-11));

  ConvexBody e3 = ConvexBody::ellipsoid({1.5, 1.0, 0.75});
  MonteCarloEstimate as3 = p_affine_surface_area(e3, 3);
  CHECK(as3.value == doctest::Approx(4 * kPi).epsilon(0.01));
  CHECK(as3.std_error < 0.005 * as3.value);
}

TEST_CASE("wavy curve: as_p against a direct Simpson oracle") {
  ConvexBody wavy = wavy_curve();
  for (double p : {-0.5, 0.0, 1.0, 2.0, 7.0}) {
    double e1 = p / (2 + p), e2 = 2 * (p - 1) / (2 + p);
    CHECK(p_affine_surface_area(wavy, p).value ==
          doctest::Approx(curve_asp_oracle(e1, e2)).epsilon(1e-9));
  }
  // p = +-infinity: exponents (1, n).
  CHECK(p_affine_surface_area(wavy, kInf).value ==
        doctest::Approx(curve_asp_oracle(1, 2)).epsilon(1e-9));
}

TEST_CASE("isoperimetric ratio: 1 on ellipsoids, below 1 elsewhere") {
  CHECK(affine_isoperimetric_ratio(ConvexBody::ball(3.7, 2), 1).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  ConvexBody e21 = ConvexBody::ellipsoid({2.0, 1.0});
  CHECK(affine_isoperimetric_ratio(e21, 1).value ==
        doctest::Approx(1.0).epsilon(1e-11));
  CHECK(affine_isoperimetric_ratio(e21, 2).value ==
        doctest::Approx(1.0).epsilon(1e-11));
  CHECK(affine_isoperimetric_ratio(ConvexBody::ball(0.4, 3), kInf).value ==
        doctest::Approx(1.0).epsilon(1e-9));

  ConvexBody wavy = wavy_curve();
  double as1 = curve_asp_oracle(1.0 / 3, 0.0);
  double vol = *wavy.closed_volume();
  double oracle = as1 / (2 * kPi) / std::cbrt(vol / kPi);
  MonteCarloEstimate ratio = affine_isoperimetric_ratio(wavy, 1);
  CHECK(ratio.value == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(ratio.value < 1.0);

  CHECK_THROWS_AS(affine_isoperimetric_ratio(wavy, -1), contract_violation);
}

TEST_CASE("curvature-optimal density: closed-form value and normalization") {
  ConvexBody e21 = ConvexBody::ellipsoid({2.0, 1.0});
  Density f2 = fn_density(e21);
  CHECK(f2.kind() == Density::Kind::AffineOptimal);
  // At the end of the long axis kappa = a/b^2 = 2 and h = 2, so
  // f = sqrt(2) / (2 pi sqrt(2)) = 1/(2 pi).
  Vector u(2);
  u << 1, 0;
  BoundaryPoint tip = e21.boundary_point(Direction{u});
  CHECK(f2(tip) == doctest::Approx(1 / (2 * kPi)).epsilon(1e-10));
  MonteCarloEstimate norm =
      boundary_integral(e21, [&](const BoundaryPoint& bp) { return f2(bp); },
                        IntegralMethod::quad2d(4096));
  CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-10));

  ConvexBody e3 = ConvexBody::ellipsoid({1.5, 1.0, 0.75});
  Density f3 = fn_density(e3);
  MonteCarloEstimate norm3 =
      boundary_integral(e3, [&](const BoundaryPoint& bp) { return f3(bp); },
                        IntegralMethod::sphere_quad3d(192));
  CHECK(norm3.value == doctest::Approx(1.0).epsilon(0.01));

  // On a ball the optimal density IS the uniform one.
  Density fb = fn_density(ConvexBody::ball(1, 3));
  Vector v(3);
  v << 0, 0, 1;
  BoundaryPoint pole = ConvexBody::ball(1, 3).boundary_point(Direction{v});
  CHECK(fb(pole) == doctest::Approx(1 / (4 * kPi)).epsilon(1e-9));
}

TEST_CASE("deficit coefficient: frozen targets for discs, spheres, ellipses") {
  ConvexBody disc = ConvexBody::ball(1, 2);
  DeficitCoefficient d2 = deficit_coefficient(disc, Density::uniform(disc));
  CHECK(d2.c_n == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(d2.product ==
        doctest::Approx(2 * kPi * kPi * kPi).epsilon(1e-10));  // 62.0125...

  ConvexBody ball3 = ConvexBody::ball(1, 3);
  DeficitCoefficient d3 = deficit_coefficient(ball3, Density::uniform(ball3));
  CHECK(d3.product == doctest::Approx(24 * kPi).epsilon(1e-9));  // 75.3982...

  // Ellipse with the uniform density: (1/4) L^2 int kappa^2 ds.
  ConvexBody e21 = ConvexBody::ellipsoid({2.0, 1.0});
  DeficitCoefficient de = deficit_coefficient(e21, Density::uniform(e21));
  CHECK(de.product == doctest::Approx(155.72444016040184).epsilon(1e-8));
  // Independent oracle: parametrize by the normal angle, kappa(t) =
  // (a^2 sin^2 t + b^2 cos^2 t)^{-3/2} ab with h-form; use support form
  // h = sqrt(a^2 cos^2 + b^2 sin^2), 1/kappa = h + h''.
  double a = 2, b = 1;
  auto h = [&](double t) {
    return std::sqrt(a * a * std::cos(t) * std::cos(t) +
                     b * b * std::sin(t) * std::sin(t));
  };
  auto inv_kappa = [&](double t) {  // = h + h'' = a^2 b^2 / h^3
    double ht = h(t);
    return a * a * b * b / (ht * ht * ht);
  };
  double int_k2 = oracles::simpson(
      [&](double t) { return 1.0 / inv_kappa(t); }, 0, 2 * kPi, 20000);
  double oracle =
      0.25 * kEllipsePerimeter * kEllipsePerimeter * int_k2;
  CHECK(de.product == doctest::Approx(oracle).epsilon(1e-9));

  // Curvature-optimal density on the same ellipse: product collapses to
  // pi^2 times the perimeter because as_2(ellipse) = 2 pi.
  DeficitCoefficient dfn = deficit_coefficient(e21, fn_density(e21));
  CHECK(dfn.product ==
        doctest::Approx(kPi * kPi * kEllipsePerimeter).epsilon(1e-8));

  // Optimal density on the unit sphere is uniform: same 24 pi.
  DeficitCoefficient d3fn = deficit_coefficient(ball3, fn_density(ball3));
  CHECK(d3fn.product == doctest::Approx(24 * kPi).epsilon(1e-6));
}

TEST_CASE("asymptotic shrink factor has closed forms on balls") {
  ConvexBody disc = ConvexBody::ball(1, 2);
  ShrinkFactor s2 = shrink_factor(disc, Density::uniform(disc), 1000,
                                  ShrinkMode::Asymptotic);
  // c = N^{-2} * 2 pi^3 / (1 * 2 pi) = (pi / N)^2.
  CHECK(s2.c == doctest::Approx(kPi * kPi * 1e-6).epsilon(1e-10));
  CHECK(s2.mode_used == ShrinkMode::Asymptotic);
  CHECK(s2.pilot_trials == 0);

  ConvexBody ball3 = ConvexBody::ball(1, 3);
  ShrinkFactor s3 = shrink_factor(ball3, Density::uniform(ball3), 2000,
                                  ShrinkMode::Asymptotic);
  // c = N^{-1} * 24 pi / (2 * 4 pi) = 3 / N.
  CHECK(s3.c == doctest::Approx(3.0 / 2000).epsilon(1e-9));

  // A point count too small for the asymptotic formula must be rejected.
  CHECK_THROWS_AS(
      shrink_factor(disc, Density::uniform(disc), 3, ShrinkMode::Asymptotic),
      contract_violation);
}

TEST_CASE("empirical shrink factor matches the exact circle expectation") {
  ConvexBody disc = ConvexBody::ball(1, 2);
  const int n_points = 64;
  // E[perimeter of the inscribed polygon] via the exact arc-gap density:
  // each gap phi contributes a chord 2 sin(phi/2).
  double expected_perimeter = oracles::circle_gap_sum_expectation(
      n_points, 2 * kPi, [](double phi) { return 2 * std::sin(phi / 2); });
  double expected_c = 1 - expected_perimeter / (2 * kPi);

  ShrinkFactor s = shrink_factor(disc, Density::uniform(disc), n_points,
                                 ShrinkMode::Empirical, 99u, 300, 2);
  CHECK(s.mode_used == ShrinkMode::Empirical);
  CHECK(s.pilot_trials == 300);
  CHECK(s.pilot_mean_area < 2 * kPi);
  CHECK(s.c == doctest::Approx(expected_c).epsilon(0.05));
  // The pilot spread must be consistent with the observed deviation.
  CHECK(std::abs(s.pilot_mean_area - expected_perimeter) <
        4 * s.pilot_stderr + 1e-12);

  // Same computation must be byte-identical regardless of the worker count.
  ShrinkFactor s1 = shrink_factor(disc, Density::uniform(disc), n_points,
                                  ShrinkMode::Empirical, 99u, 300, 1);
  ShrinkFactor s8 = shrink_factor(disc, Density::uniform(disc), n_points,
                                  ShrinkMode::Empirical, 99u, 300, 8);
  CHECK(s1.c == s.c);
  CHECK(s8.c == s.c);
}

TEST_CASE("empirical and asymptotic shrink agree for dense sphere samples") {
  ConvexBody ball3 = ConvexBody::ball(1, 3);
  Density uni = Density::uniform(ball3);
  ShrinkFactor emp =
      shrink_factor(ball3, uni, 2000, ShrinkMode::Empirical, 7u, 120, 4);
  ShrinkFactor asym = shrink_factor(ball3, uni, 2000, ShrinkMode::Asymptotic);
  CHECK(emp.c == doctest::Approx(asym.c).epsilon(0.25));
}

TEST_CASE("auto mode switches on the point count") {
  ConvexBody disc = ConvexBody::ball(1, 2);
  Density uni = Density::uniform(disc);
  ShrinkFactor small = shrink_factor(disc, uni, 400, ShrinkMode::Auto, 5u, 40, 4);
  CHECK(small.mode_used == ShrinkMode::Empirical);
  ShrinkFactor large = shrink_factor(disc, uni, 50000, ShrinkMode::Auto);
  CHECK(large.mode_used == ShrinkMode::Asymptotic);
  CHECK(large.c == doctest::Approx(kPi * kPi / 2.5e9).epsilon(1e-9));
}
