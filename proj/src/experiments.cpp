#include "polydev/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polydev/integrate.hpp"

namespace polydev {
namespace {

constexpr std::uint64_t kDeficitTrialTag = 0x68de'f1c1;
constexpr std::uint64_t kConstructPointsTag = 0xc0'257c;
constexpr std::uint64_t kConstructSweepTag = 0xde'7a11;
constexpr std::uint64_t kBpStream = 0xb9'c4ec;
constexpr std::uint64_t kIdentityNormalStream = 0x1d'e6a1;
constexpr std::uint64_t kIdentityRadialStream = 0x1d'e6a2;
// Mixed once into a trial's stream id when its first hull attempt fails.
constexpr std::uint64_t kRetrySalt = 0x9e3779b97f4a7c15ULL;

struct MeanStderr {
  double mean = 0.0;
  double sem = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  const auto k = static_cast<double>(v.size());
  if (v.empty()) return out;
  double sum = 0.0;
  for (double d : v) sum += d;
  out.mean = sum / k;
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double d : v) ss += (d - out.mean) * (d - out.mean);
  out.sem = std::sqrt(ss / (k - 1.0) / k);
  return out;
}

std::vector<Vector> draw_boundary_points(const ConvexBody& body,
                                         const Density& density, int n_points,
                                         Rng& rng) {
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i)
    pts.push_back(sample_boundary(body, density, rng).x);
  return pts;
}

/// Hull of n_points density draws for one trial.  A degenerate hull aborts
/// the trial once; the retry reruns it under a salted stream.  Fully
/// determined by (seed, stream), so the same call later rebuilds the same
/// polytope.
Polytope trial_hull(const ConvexBody& body, const Density& density,
                    int n_points, std::uint64_t seed, std::uint64_t stream,
                    bool* retried) {
  {
    Rng rng(seed, stream);
    std::vector<Vector> pts = draw_boundary_points(body, density, n_points, rng);
    try {
      return convex_hull(pts, body.dim(), stream);
    } catch (const degenerate_hull_error&) {
      if (retried) *retried = true;
    }
  }
  Rng rng(seed, stream ^ kRetrySalt);
  std::vector<Vector> pts = draw_boundary_points(body, density, n_points, rng);
  return convex_hull(pts, body.dim(), stream ^ kRetrySalt);
}

void check_trial_args(const ConvexBody& body, int n_points, int trials,
                      const char* what) {
  if (n_points <= body.dim())
    throw contract_violation(std::string(what) +
                             ": need more points than the dimension");
  if (trials < 1)
    throw contract_violation(std::string(what) + ": trials must be >= 1");
}

void check_schedule(const std::vector<int>& schedule, const char* what) {
  if (schedule.size() < 3)
    throw contract_violation(std::string(what) +
                             ": schedule needs at least 3 point counts");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1])
      throw contract_violation(std::string(what) +
                               ": schedule must be strictly increasing");
}

const char* shrink_mode_name(ShrinkMode m) {
  switch (m) {
    case ShrinkMode::Asymptotic:
      return "asymptotic";
    case ShrinkMode::Empirical:
      return "empirical";
    default:
      return "auto";
  }
}

int count_flags(const std::vector<std::uint8_t>& flags) {
  int c = 0;
  for (auto f : flags) c += f != 0;
  return c;
}

}  // namespace

DeficitResult hull_deficit(const ConvexBody& body, const Density& density,
                           int n_points, int trials, std::uint64_t seed,
                           int workers, double target) {
  check_trial_args(body, n_points, trials, "hull_deficit");
  const int n = body.dim();
  const double area = surface_area(body);

  std::vector<double> deficits(trials, 0.0);
  std::vector<std::uint8_t> retried(trials, 0);
  parallel_for_indexed(trials, workers, [&](std::int64_t t) {
    bool r = false;
    Polytope hull =
        trial_hull(body, density, n_points, seed,
                   derive_stream(kDeficitTrialTag, n_points, t), &r);
    deficits[static_cast<std::size_t>(t)] = area - hull.surface_area();
    retried[static_cast<std::size_t>(t)] = r ? 1 : 0;
  });

  if (std::isnan(target)) {
    AffinePrecision prec;
    prec.seed = seed;
    target = deficit_coefficient(body, density, prec).product;
  }

  MeanStderr ms = mean_stderr(deficits);
  DeficitResult out;
  out.n_points = n_points;
  out.trials = trials;
  out.mean_deficit = ms.mean;
  out.std_error = ms.sem;
  out.normalized = ms.mean * std::pow(static_cast<double>(n_points),
                                      2.0 / static_cast<double>(n - 1));
  out.target = target;
  out.ratio = out.normalized / target;
  out.retried_trials = count_flags(retried);
  out.seed = seed;
  return out;
}

std::vector<DeficitResult> deficit_study(const ConvexBody& body,
                                         const Density& density,
                                         const std::vector<int>& schedule,
                                         int trials, std::uint64_t seed,
                                         int workers) {
  check_schedule(schedule, "deficit_study");
  AffinePrecision prec;
  prec.seed = seed;
  const double target = deficit_coefficient(body, density, prec).product;
  std::vector<DeficitResult> rows;
  rows.reserve(schedule.size());
  for (int n_points : schedule)
    rows.push_back(
        hull_deficit(body, density, n_points, trials, seed, workers, target));
  return rows;
}

ConstructionResult run_construction(const ConvexBody& body,
                                    const Density& density, int n_points,
                                    int trials, ShrinkMode c_mode,
                                    std::uint64_t seed, int workers,
                                    std::int64_t samples_per_trial) {
  check_trial_args(body, n_points, trials, "run_construction");
  const int n = body.dim();

  ShrinkFactor shrink =
      shrink_factor(body, density, n_points, c_mode, seed, 200, workers);
  const ConvexBody inner = body.scaled(1.0 - shrink.c);
  const double rescale =
      std::pow(1.0 - shrink.c, -static_cast<double>(n - 1));

  AffinePrecision prec;
  prec.seed = seed;
  const double area = surface_area(body);
  const double as_n =
      p_affine_surface_area(body, static_cast<double>(n), prec).value;
  const double bound =
      n * std::pow(static_cast<double>(n_points), -2.0 / (n - 1)) *
      std::pow(as_n, 2.0 / (n - 1)) * area;

  std::vector<double> deltas(trials, 0.0);
  std::vector<double> ratios(trials, 0.0);
  std::vector<std::uint8_t> retried(trials, 0), misses(trials, 0),
      fallbacks(trials, 0), shorts(trials, 0);
  const Vector origin = Vector::Zero(n);

  parallel_for_indexed(trials, workers, [&](std::int64_t t) {
    const auto i = static_cast<std::size_t>(t);
    bool r = false;
    Polytope poly =
        trial_hull(body, density, n_points, seed,
                   derive_stream(kConstructPointsTag, n_points, t), &r);
    retried[i] = r ? 1 : 0;
    shorts[i] = static_cast<int>(poly.vertices.size()) < n_points ? 1 : 0;
    misses[i] = poly.contains(origin) ? 0 : 1;
    DeviationEstimate est = surface_deviation(
        inner, poly, samples_per_trial, seed,
        derive_stream(kConstructSweepTag, n_points, t), DeviationMethod::Auto);
    fallbacks[i] = est.method_used == DeviationMethod::Decomposed ? 1 : 0;
    deltas[i] = est.delta.value;
    ratios[i] = est.delta.value * rescale / bound;
  });

  MeanStderr ms = mean_stderr(deltas);
  ConstructionResult out;
  out.n_points = n_points;
  out.trials = trials;
  out.shrink_c = shrink.c;
  out.shrink_mode_used = shrink.mode_used;
  out.samples_per_trial = samples_per_trial;
  out.seed = seed;
  out.mean_delta = ms.mean;
  out.std_error = ms.sem;
  out.mean_rescaled = ms.mean * rescale;
  out.bound_ratios = std::move(ratios);
  out.bound_ratio_max =
      *std::max_element(out.bound_ratios.begin(), out.bound_ratios.end());
  out.origin_misses = count_flags(misses);
  out.decomposed_fallbacks = count_flags(fallbacks);
  out.short_hull_trials = count_flags(shorts);
  out.retried_trials = count_flags(retried);

  out.min_trial = static_cast<int>(
      std::min_element(deltas.begin(), deltas.end()) - deltas.begin());
  out.min_delta = deltas[static_cast<std::size_t>(out.min_trial)];
  out.witness = trial_hull(
      body, density, n_points, seed,
      derive_stream(kConstructPointsTag, n_points, out.min_trial), nullptr);
  return out;
}

ScalingReport scaling_study(const ConvexBody& body, const Density& density,
                            const std::vector<int>& schedule, int trials,
                            ShrinkMode c_mode, std::uint64_t seed, int workers,
                            std::int64_t samples_per_trial) {
  check_schedule(schedule, "scaling_study");
  if (schedule.back() < 8 * schedule.front())
    throw contract_violation(
        "scaling_study: schedule must span at least a factor of 8 in N");

  ScalingReport rep;
  rep.body_id = body.describe();
  rep.density_kind = density.label();
  rep.seed = seed;
  rep.schedule = schedule;
  rep.per_n.reserve(schedule.size());

  std::vector<double> log_n, log_mean, max_ratio;
  for (int n_points : schedule) {
    rep.per_n.push_back(run_construction(body, density, n_points, trials,
                                         c_mode, seed, workers,
                                         samples_per_trial));
    const ConstructionResult& run = rep.per_n.back();
    if (!(run.mean_delta > 0.0))
      throw numerical_failure(
          "scaling_study: mean deviation is not positive at N = " +
          std::to_string(n_points) + "; raise trials or samples_per_trial");
    log_n.push_back(std::log(static_cast<double>(n_points)));
    log_mean.push_back(std::log(run.mean_delta));
    max_ratio.push_back(run.bound_ratio_max);
  }

  rep.slope = ols_slope(log_n, log_mean, &rep.slope_half_width);
  rep.bound_ratio_max =
      *std::max_element(max_ratio.begin(), max_ratio.end());
  rep.bound_trend = theil_sen_slope(log_n, max_ratio);
  return rep;
}

std::string ScalingReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["body_id"] = body_id;
  j["density_kind"] = density_kind;
  j["seed"] = seed;
  j["schedule"] = schedule;
  j["slope"] = slope;
  j["slope_half_width"] = slope_half_width;
  j["bound_ratio_max"] = bound_ratio_max;
  j["bound_trend"] = bound_trend;
  nlohmann::json rows = nlohmann::json::array();
  for (const ConstructionResult& run : per_n) {
    nlohmann::json r;
    r["n_points"] = run.n_points;
    r["trials"] = run.trials;
    r["shrink_c"] = run.shrink_c;
    r["shrink_mode"] = shrink_mode_name(run.shrink_mode_used);
    r["samples_per_trial"] = run.samples_per_trial;
    r["seed"] = run.seed;
    r["mean_delta_s"] = run.mean_delta;
    r["stderr"] = run.std_error;
    r["rescaled_mean"] = run.mean_rescaled;
    r["min_delta_s"] = run.min_delta;
    r["min_trial"] = run.min_trial;
    r["witness_vertex_count"] = run.witness.vertices.size();
    r["bound_ratio_max"] = run.bound_ratio_max;
    r["bound_ratios"] = run.bound_ratios;
    r["origin_misses"] = run.origin_misses;
    r["decomposed_fallbacks"] = run.decomposed_fallbacks;
    r["short_hull_trials"] = run.short_hull_trials;
    r["retried_trials"] = run.retried_trials;
    rows.push_back(std::move(r));
  }
  j["per_n"] = std::move(rows);
  return j.dump();
}

bool IdentityReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const IdentityRow& r) { return r.pass; });
}

IdentityReport verify_identities(const ConvexBody& body, std::uint64_t seed) {
  const int n = body.dim();
  if (n != 2 && n != 3)
    throw contract_violation("verify_identities: only n in {2, 3}");
  const double tol = (n == 2) ? 1e-6 : 0.01;

  AffinePrecision prec;
  prec.seed = seed;
  const IntegralMethod normal_m =
      (n == 2) ? IntegralMethod::quad2d(prec.nodes)
               : IntegralMethod::mc(prec.samples, seed, kIdentityNormalStream);
  const IntegralMethod radial_m =
      (n == 2)
          ? IntegralMethod::radial_quad2d(prec.nodes)
          : IntegralMethod::radial_mc(prec.samples, seed,
                                      kIdentityRadialStream);

  IdentityReport rep;
  auto add = [&rep, tol](std::string name, double lhs, double rhs) {
    IdentityRow r;
    r.identity = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.rel_error = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    r.tolerance = tol;
    r.pass = r.rel_error <= tol;
    rep.rows.push_back(std::move(r));
  };

  // Support weighted by mean curvature integrates to the surface area.
  double mixed =
      boundary_integral(
          body,
          [](const BoundaryPoint& bp) { return bp.support * bp.mean_curv; },
          normal_m)
          .value;
  add("minkowski_support_mean_curvature", mixed, surface_area(body));

  // Integrating g over outer normals equals integrating g * kappa over the
  // boundary.  The left side is a plain sphere integral; the right side runs
  // through the radial parametrization, so the two routes share nothing.
  struct Weight {
    const char* name;
    std::function<double(const Vector&)> g;
  };
  const std::vector<Weight> weights = {
      {"one", [](const Vector&) { return 1.0; }},
      {"norm_sq", [](const Vector& x) { return x.squaredNorm(); }},
      {"inv_one_plus_norm_sq",
       [](const Vector& x) { return 1.0 / (1.0 + x.squaredNorm()); }},
      {"gaussian", [](const Vector& x) { return std::exp(-x.squaredNorm()); }},
      {"shifted_first_coord_sq",
       [](const Vector& x) { return (x[0] + 4.0) * (x[0] + 4.0); }},
  };
  for (const Weight& w : weights) {
    double sphere_side = sphere_integral_det(
        n,
        [&](const Vector& u) { return w.g(body.boundary_point(Direction(u)).x); },
        2048);
    double boundary_side =
        boundary_integral(
            body, [&](const BoundaryPoint& bp) { return w.g(bp.x) * bp.kappa; },
            radial_m)
            .value;
    add(std::string("change_of_variables_") + w.name, sphere_side,
        boundary_side);
  }

  // The curvature-optimal density must integrate to 1; checked through the
  // radial route, independent of the normalizer's own quadrature.
  Density fn = fn_density(body, prec);
  double mass =
      boundary_integral(
          body, [&](const BoundaryPoint& bp) { return fn(bp); }, radial_m)
          .value;
  add("fn_normalization", mass, 1.0);

  add("as0_equals_n_volume", p_affine_surface_area(body, 0.0, prec).value,
      n * body_volume(body));

  const ConvexBody ball = ConvexBody::ball(1.0, n);
  const double omega = sphere_surface(n);
  for (double p : {-1.0, 0.0, 1.0, static_cast<double>(n), 10.0}) {
    char label[48];
    std::snprintf(label, sizeof label, "ball_asp_p_%g", p);
    add(label, p_affine_surface_area(ball, p, prec).value, omega);
  }
  return rep;
}

namespace {

/// Root of a monotone function on [lo, hi] with a sign change, by the
/// Illinois variant of regula falsi.  Returns false if the bracket is
/// invalid or the iteration stalls.
bool solve_crossing(const std::function<double(double)>& f, double lo,
                    double hi, double* root) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) {
    *root = a;
    return true;
  }
  if (fb == 0.0) {
    *root = b;
    return true;
  }
  if ((fa > 0.0) == (fb > 0.0)) return false;
  for (int it = 0; it < 200; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b)) || !(c < std::max(a, b))) c = 0.5 * (a + b);
    double fc = f(c);
    if (fc == 0.0 || std::abs(b - a) < 1e-12) {
      *root = c;
      return true;
    }
    if ((fc > 0.0) == (fa > 0.0)) {
      a = c;
      fa = fc;
      fb *= 0.5;  // Illinois: damp the retained endpoint
    } else {
      b = c;
      fb = fc;
      fa *= 0.5;
    }
  }
  *root = 0.5 * (a + b);
  return std::abs(b - a) < 1e-9;
}

}  // namespace

IdentityRow blaschke_petkantschin_2d(const ConvexBody& body,
                                     std::int64_t samples,
                                     std::uint64_t seed) {
  if (body.dim() != 2)
    throw contract_violation("blaschke_petkantschin_2d: 2-D bodies only");
  if (samples < 100)
    throw contract_violation(
        "blaschke_petkantschin_2d: need at least 100 samples");

  const double length = surface_area(body);
  auto point_at = [&body](double tau) {
    Vector u(2);
    u << std::cos(tau), std::sin(tau);
    return body.boundary_point(Direction(u)).x;
  };

  Rng rng(seed, kBpStream);
  double sum = 0.0;
  std::int64_t solver_failures = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double theta = 2.0 * kPi * rng.uniform01();
    const double frac = rng.uniform01();
    // Lines nearly tangent to the body are excluded; the neglected mass is
    // integrable and folded into the tolerance.
    if (frac >= 1.0 - 1e-6) continue;

    Vector u(2);
    u << std::cos(theta), std::sin(theta);
    const double h_max = body.support(Direction(u));
    const double h = frac * h_max;
    auto lift = [&](double tau) { return point_at(tau).dot(u) - h; };

    // The height along u is monotone on each half of the boundary, from
    // h_max at the normal angle theta down to the opposite support value.
    double t1 = 0.0, t2 = 0.0;
    if (!solve_crossing(lift, theta, theta + kPi, &t1) ||
        !solve_crossing(lift, theta + kPi, theta + 2.0 * kPi, &t2)) {
      ++solver_failures;
      continue;
    }
    const Vector x1 = point_at(t1);
    const Vector x2 = point_at(t2);
    // The boundary normal at angle t makes <N, w> = sin(t - theta) with the
    // line direction w; its inverse is the chord weight at that crossing.
    const double s1 = std::abs(std::sin(t1 - theta));
    const double s2 = std::abs(std::sin(t2 - theta));
    sum += 2.0 * kPi * h_max * 2.0 * (x1 - x2).norm() / (s1 * s2);
  }

  const auto m = static_cast<double>(samples);
  const double mean = sum / m;

  IdentityRow row;
  row.identity = "blaschke_petkantschin_2d";
  row.lhs = length * length;
  row.rhs = mean;
  row.rel_error = std::abs(row.lhs - row.rhs) / row.lhs;
  row.tolerance = 0.02;
  row.pass = row.rel_error <= row.tolerance && solver_failures == 0;
  return row;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* half_width_95) {
  if (x.size() != y.size() || x.size() < 2)
    throw contract_violation("ols_slope: need matching x/y with >= 2 points");
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0)
    throw contract_violation("ols_slope: x values must not be constant");
  const double slope = sxy / sxx;

  if (half_width_95) {
    static const double t_table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
        2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
        2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    const int df = static_cast<int>(x.size()) - 2;
    if (df < 1) {
      *half_width_95 = std::numeric_limits<double>::infinity();
    } else {
      const double intercept = my - slope * mx;
      double sse = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - intercept - slope * x[i];
        sse += r * r;
      }
      const double t = df <= 30 ? t_table[df - 1] : 1.960;
      *half_width_95 = t * std::sqrt(sse / df / sxx);
    }
  }
  return slope;
}

double theil_sen_slope(const std::vector<double>& x,
                       const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw contract_violation(
        "theil_sen_slope: need matching x/y with >= 2 points");
  std::vector<double> slopes;
  slopes.reserve(x.size() * (x.size() - 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
  if (slopes.empty())
    throw contract_violation("theil_sen_slope: x values must not be constant");
  std::sort(slopes.begin(), slopes.end());
  const std::size_t k = slopes.size();
  return (k % 2 == 1) ? slopes[k / 2]
                      : 0.5 * (slopes[k / 2 - 1] + slopes[k / 2]);
}

}  // namespace polydev
