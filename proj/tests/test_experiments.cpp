#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "polydev/experiments.hpp"
#include "polydev/integrate.hpp"

using namespace polydev;

namespace {

const double kEllipsePerimeter = 9.6884482205476762;  // axes (2, 1)

const IdentityRow& find_row(const IdentityReport& rep, const std::string& id) {
  for (const IdentityRow& r : rep.rows)
    if (r.identity == id) return r;
  FAIL("missing identity row ", id);
  static IdentityRow dummy;
  return dummy;
}

}  // namespace

TEST_CASE("least-squares slope with confidence half-width") {
  // exact line: zero residuals, zero half-width
  std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  std::vector<double> y = {3.0, 1.0, -1.0, -3.0};
  double hw = -1.0;
  CHECK(ols_slope(x, y, &hw) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(hw == doctest::Approx(0.0).epsilon(1e-10));

  // hand-computed fit: slope 0.9, SSE 0.7, Sxx 5, t(2 dof) = 4.303
  y = {1.0, 2.0, 2.0, 4.0};
  CHECK(ols_slope(x, y, &hw) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(hw == doctest::Approx(4.303 * std::sqrt(0.7 / 2.0 / 5.0)).epsilon(1e-12));

  CHECK_THROWS_AS(ols_slope({1.0, 2.0}, {1.0}, nullptr), contract_violation);
  CHECK_THROWS_AS(ols_slope({1.0, 1.0}, {1.0, 2.0}, nullptr),
                  contract_violation);
}

TEST_CASE("median-of-slopes fit shrugs off one outlier") {
  std::vector<double> x = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> y = {0.0, 2.0, 4.0, 6.0, 100.0};
  CHECK(theil_sen_slope(x, y) == doctest::Approx(2.0).epsilon(1e-14));
  // least squares is dragged far away by the same point
  CHECK(ols_slope(x, y, nullptr) > 10.0);
  CHECK_THROWS_AS(theil_sen_slope({2.0, 2.0}, {1.0, 2.0}), contract_violation);
}

TEST_CASE("circle deficit matches the exact gap-sum expectation") {
  ConvexBody disc = ConvexBody::ball(1.0, 2);
  Density uniform = Density::uniform(disc);
  const int n_points = 400;
  DeficitResult row = hull_deficit(disc, uniform, n_points, 120, 777, 4);

  // E[L - perimeter of the gap polygon] for iid uniform points on the circle
  double expected = oracles::circle_gap_sum_expectation(
      n_points, 2.0 * kPi,
      [](double phi) { return phi - 2.0 * std::sin(phi / 2.0); });
  CHECK(row.mean_deficit > 0.0);
  CHECK(std::abs(row.mean_deficit - expected) < 4.0 * row.std_error);
  CHECK(row.std_error < 0.03 * row.mean_deficit);

  // the limiting coefficient for the uniform circle is 2 pi^3
  CHECK(row.target ==
        doctest::Approx(2.0 * kPi * kPi * kPi).epsilon(1e-10));
  CHECK(row.normalized == doctest::Approx(row.mean_deficit * 160000.0));
  CHECK(std::abs(row.ratio - 1.0) < 0.1);
  CHECK(row.retried_trials == 0);

  // aggregates do not depend on the worker count
  DeficitResult again = hull_deficit(disc, uniform, n_points, 120, 777, 1);
  CHECK(again.mean_deficit == row.mean_deficit);
  CHECK(again.std_error == row.std_error);
  CHECK(again.normalized == row.normalized);
}

TEST_CASE("deficit schedule: decreasing means, ratios near 1") {
  ConvexBody disc = ConvexBody::ball(1.0, 2);
  Density uniform = Density::uniform(disc);
  std::vector<DeficitResult> rows =
      deficit_study(disc, uniform, {200, 400, 800}, 150, 31, 4);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].mean_deficit > rows[1].mean_deficit);
  CHECK(rows[1].mean_deficit > rows[2].mean_deficit);
  for (const DeficitResult& r : rows) {
    CHECK(r.mean_deficit > 0.0);
    CHECK(std::abs(r.ratio - 1.0) < 0.1);
  }
  // convergence: the last point is at least as close to 1 as the first,
  // up to trial noise
  CHECK(std::abs(rows[2].ratio - 1.0) <= std::abs(rows[0].ratio - 1.0) + 0.03);

  CHECK_THROWS_AS(deficit_study(disc, uniform, {200, 400}, 10, 1, 1),
                  contract_violation);
  CHECK_THROWS_AS(deficit_study(disc, uniform, {400, 400, 800}, 10, 1, 1),
                  contract_violation);
}

TEST_CASE("ellipse deficit reaches its quadrature target, both densities") {
  ConvexBody ellipse = ConvexBody::ellipsoid({2.0, 1.0});

  // uniform density: target = c_2 * integral kappa^2 / (1/L)^2 ... = the
  // frozen quadrature value
  Density uniform = Density::uniform(ellipse);
  DeficitResult u = hull_deficit(ellipse, uniform, 800, 150, 99, 4);
  CHECK(u.target == doctest::Approx(155.72444016040184).epsilon(1e-8));
  CHECK(std::abs(u.ratio - 1.0) < 0.15);

  // curvature-optimal density: target = pi^2 * L
  Density fn = fn_density(ellipse);
  DeficitResult f = hull_deficit(ellipse, fn, 800, 150, 99, 4);
  CHECK(f.target ==
        doctest::Approx(kPi * kPi * kEllipsePerimeter).epsilon(1e-8));
  CHECK(std::abs(f.ratio - 1.0) < 0.15);

  // the optimal density beats uniform in the limiting coefficient
  CHECK(f.target < u.target);
}

TEST_CASE("identity suite passes on the 2-D bodies at quadrature accuracy") {
  for (const ConvexBody& body :
       {ConvexBody::ball(1.0, 2), ConvexBody::ellipsoid({2.0, 1.0})}) {
    IdentityReport rep = verify_identities(body, 5);
    REQUIRE(rep.rows.size() == 13);
    CHECK(rep.all_pass());
    for (const IdentityRow& r : rep.rows) {
      CHECK(r.tolerance == 1e-6);
      CHECK(r.pass == (r.rel_error <= r.tolerance));
    }

    // integrating 1 over outer normals is the length of the spherical image
    const IdentityRow& one = find_row(rep, "change_of_variables_one");
    CHECK(one.lhs == doctest::Approx(2.0 * kPi).epsilon(1e-10));

    const IdentityRow& mink = find_row(rep, "minkowski_support_mean_curvature");
    CHECK(mink.rhs == doctest::Approx(surface_area(body)).epsilon(1e-12));
    CHECK(mink.rel_error < 1e-9);
  }
}

TEST_CASE("identity suite passes on 3-D bodies; support/curvature integral "
          "pins the mean-curvature normalization") {
  ConvexBody ellipsoid = ConvexBody::ellipsoid({1.5, 1.0, 0.75});
  IdentityReport rep = verify_identities(ellipsoid, 5);
  REQUIRE(rep.rows.size() == 13);
  CHECK(rep.all_pass());
  for (const IdentityRow& r : rep.rows) CHECK(r.tolerance == 0.01);

  // Regression for the normalization of the mean curvature: with H taken as
  // (sum of principal curvatures)/n instead of /(n-1), the support-weighted
  // integral must land near (n-1)/n of the surface area and fail the 1%
  // tolerance by a wide margin.
  double literal = boundary_integral(
                       ellipsoid,
                       [](const BoundaryPoint& bp) {
                         return bp.support * bp.mean_curv * (2.0 / 3.0);
                       },
                       IntegralMethod::mc(2000000, 5, 0x1de6a1))
                       .value;
  double area = surface_area(ellipsoid);
  CHECK(literal / area == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  CHECK(std::abs(literal - area) / area > 0.25);

  // unit ball: every row is a closed-form case
  IdentityReport ball_rep = verify_identities(ConvexBody::ball(1.0, 3), 5);
  CHECK(ball_rep.all_pass());
  const IdentityRow& mink = find_row(ball_rep, "minkowski_support_mean_curvature");
  CHECK(mink.rhs == doctest::Approx(4.0 * kPi).epsilon(1e-12));

  CHECK_THROWS_AS(verify_identities(ConvexBody::ball(1.0, 4), 5),
                  contract_violation);
}

TEST_CASE("squared perimeter equals the chord-weight line integral") {
  ConvexBody disc = ConvexBody::ball(1.0, 2);
  IdentityRow ball_row = blaschke_petkantschin_2d(disc, 1000000, 42);
  const double four_pi_sq = 4.0 * kPi * kPi;
  CHECK(ball_row.lhs == doctest::Approx(four_pi_sq).epsilon(1e-12));
  CHECK(ball_row.rhs == doctest::Approx(four_pi_sq).epsilon(0.02));
  CHECK(ball_row.pass);
  CHECK(ball_row.tolerance == 0.02);

  ConvexBody ellipse = ConvexBody::ellipsoid({2.0, 1.0});
  IdentityRow ell_row = blaschke_petkantschin_2d(ellipse, 1000000, 42);
  CHECK(ell_row.lhs ==
        doctest::Approx(kEllipsePerimeter * kEllipsePerimeter).epsilon(1e-9));
  CHECK(ell_row.pass);

  CHECK_THROWS_AS(blaschke_petkantschin_2d(ConvexBody::ball(1.0, 3), 1000, 1),
                  contract_violation);
  CHECK_THROWS_AS(blaschke_petkantschin_2d(disc, 10, 1), contract_violation);
}

TEST_CASE("single-N construction run: witness, ratios, reproducibility") {
  ConvexBody disc = ConvexBody::ball(1.0, 2);
  Density fn = fn_density(disc);
  const int n_points = 1000;
  ConstructionResult run = run_construction(disc, fn, n_points, 60,
                                            ShrinkMode::Auto, 1729, 4, 100000);

  CHECK(run.shrink_mode_used == ShrinkMode::Empirical);
  // expectation-matched shrink for the unit circle is about pi^2 / N^2
  CHECK(run.shrink_c > 0.5 * kPi * kPi / 1e6);
  CHECK(run.shrink_c < 2.0 * kPi * kPi / 1e6);

  // the mean rescaled deviation sits within a factor 3 of twice the deficit
  // prediction 2 pi^3 / N^2
  double predicted = 2.0 * 2.0 * kPi * kPi * kPi / (1e6);
  CHECK(run.mean_rescaled > predicted / 3.0);
  CHECK(run.mean_rescaled < predicted * 3.0);
  CHECK(run.mean_delta > 0.0);
  CHECK(run.std_error < 0.05 * run.mean_delta);

  CHECK(run.min_delta <= run.mean_delta);
  CHECK(run.min_trial >= 0);
  CHECK(run.min_trial < 60);
  // Every boundary point of a strictly convex body is extreme, up to the
  // hull builder's resolution: a point whose height over its neighbours'
  // chord is below ~1e-10 is merged into the chord.  At N = 1000 the minimum
  // spacing of random circle points makes that a ~10% event per trial, each
  // dropping one or two vertices.
  CHECK(run.witness.vertices.size() >= 997);
  CHECK(run.short_hull_trials <= 12);
  CHECK(run.origin_misses == 0);
  CHECK(run.decomposed_fallbacks == 0);
  CHECK(run.retried_trials == 0);

  REQUIRE(run.bound_ratios.size() == 60);
  for (double r : run.bound_ratios) {
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
  }
  CHECK(run.bound_ratio_max ==
        *std::max_element(run.bound_ratios.begin(), run.bound_ratios.end()));
  CHECK(run.bound_ratio_max < 1.0);
  CHECK(run.bound_ratio_max > 0.05);

  // worker count must not leak into any result, including the witness
  ConstructionResult again = run_construction(disc, fn, n_points, 60,
                                              ShrinkMode::Auto, 1729, 1, 100000);
  CHECK(again.mean_delta == run.mean_delta);
  CHECK(again.std_error == run.std_error);
  CHECK(again.shrink_c == run.shrink_c);
  CHECK(again.min_trial == run.min_trial);
  CHECK(again.bound_ratio_max == run.bound_ratio_max);
  CHECK(polytope_to_json(again.witness) == polytope_to_json(run.witness));
}

TEST_CASE("construction run in 3-D keeps positive ratios and finds the origin") {
  ConvexBody ball = ConvexBody::ball(1.0, 3);
  Density fn = fn_density(ball);
  ConstructionResult run = run_construction(ball, fn, 500, 40,
                                            ShrinkMode::Auto, 11, 4, 60000);
  CHECK(run.shrink_mode_used == ShrinkMode::Empirical);
  // prediction: twice the deficit limit 24 pi / N
  double predicted = 2.0 * 24.0 * kPi / 500.0;
  CHECK(run.mean_rescaled > predicted / 3.0);
  CHECK(run.mean_rescaled < predicted * 3.0);
  CHECK(run.origin_misses == 0);
  CHECK(run.witness.vertices.size() >= 499);
  for (double r : run.bound_ratios) {
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
  }
  CHECK(run.bound_ratio_max < 1.0);
}

TEST_CASE("scaling study: slope -2 in the plane, flat bound ratios, "
          "byte-identical reports") {
  ConvexBody disc = ConvexBody::ball(1.0, 2);
  Density fn = fn_density(disc);
  std::vector<int> schedule = {200, 400, 800, 1600};
  ScalingReport rep =
      scaling_study(disc, fn, schedule, 100, ShrinkMode::Auto, 2024, 4, 100000);

  REQUIRE(rep.per_n.size() == 4);
  CHECK(rep.schedule == schedule);
  CHECK(std::abs(rep.slope + 2.0) < 0.15);
  // the confidence interval covers the limiting exponent
  CHECK(std::abs(rep.slope + 2.0) <= rep.slope_half_width);
  CHECK(std::abs(rep.bound_trend) < 0.2);
  CHECK(rep.bound_ratio_max > 0.0);
  CHECK(rep.bound_ratio_max < 1.0);
  for (const ConstructionResult& run : rep.per_n) {
    CHECK(run.origin_misses == 0);
    CHECK(run.mean_delta > 0.0);
  }

  ScalingReport again =
      scaling_study(disc, fn, schedule, 100, ShrinkMode::Auto, 2024, 1, 100000);
  CHECK(again.to_json() == rep.to_json());

  CHECK_THROWS_AS(scaling_study(disc, fn, {200, 400}, 10, ShrinkMode::Auto, 1,
                                1, 100000),
                  contract_violation);
  CHECK_THROWS_AS(scaling_study(disc, fn, {200, 400, 800}, 10, ShrinkMode::Auto,
                                1, 1, 100000),
                  contract_violation);  // spans less than a factor of 8
  CHECK_THROWS_AS(scaling_study(disc, fn, {400, 200, 800, 1600}, 10,
                                ShrinkMode::Auto, 1, 1, 100000),
                  contract_violation);
}
