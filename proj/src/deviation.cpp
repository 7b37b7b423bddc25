#include "polydev/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace polydev {

namespace {

struct MeanVar {
  double sum = 0, sumsq = 0;
  std::int64_t n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0; }
  double sem() const {
    if (n < 2) return std::numeric_limits<double>::infinity();
    double var = (sumsq - sum * sum / n) / (n - 1);
    return std::sqrt(std::max(0.0, var) / n);
  }
};

void check_pair(const ConvexBody& body, const Polytope& poly,
                std::int64_t samples) {
  if (poly.dim != body.dim())
    throw contract_violation("deviation: body and polytope dimensions differ");
  if (samples < 100)
    throw contract_violation("deviation: need at least 100 samples");
}

// The common error policy: reject estimates drowned in their own noise.
void enforce_error_cap(double value, double std_error, double body_area,
                       const char* what) {
  double cap = std::max(0.02 * std::abs(value), 1e-4 * body_area);
  if (!(std_error <= cap))
    throw numerical_failure(
        std::string(what) + ": standard error " + format_double(std_error) +
        " exceeds the allowed " + format_double(cap) + " (estimate " +
        format_double(value) +
        "); raise the sample count or switch estimators");
}

DeviationEstimate radial_sweep(const ConvexBody& body, const Polytope& poly,
                               std::int64_t samples, std::uint64_t seed,
                               std::uint64_t stream) {
  const int n = body.dim();
  const double sphere = sphere_surface(n);
  RadialPolytope rp(poly);
  Rng rng(seed, stream);
  MeanVar coupled, f_body_out, f_poly_out, f_body_in, f_poly_in;
  // In the plane, directions are drawn one per equal-angle stratum (jittered
  // grid).  The estimator stays unbiased and the reported standard errors
  // stay valid upper bounds, while the stratification suppresses the
  // first-order facet-normal mismatch noise that iid directions pick up on
  // non-circular bodies.
  const double stratum = 2.0 * kPi / static_cast<double>(samples);
  Vector v(n);
  for (std::int64_t i = 0; i < samples; ++i) {
    if (n == 2) {
      double theta = (static_cast<double>(i) + rng.uniform01()) * stratum;
      v << std::cos(theta), std::sin(theta);
    } else {
      v = sample_unit_sphere(n, rng);
    }
    RadialSection sec = body.radial_point(v);
    double cos_body = sec.bp.normal.dot(v);
    double a = std::pow(sec.rho, n - 1) / cos_body;
    int fid = -1;
    double rho_p = rp.radial(v, &fid);
    const PolytopeFacet& f = poly.facets[fid];
    double b = std::pow(rho_p, n - 1) / f.normal.dot(v);
    bool body_farther = sec.rho > rho_p;
    coupled.add(body_farther ? a - b : b - a);
    f_body_out.add(body_farther ? a : 0);
    f_body_in.add(body_farther ? 0 : a);
    f_poly_out.add(body_farther ? 0 : b);
    f_poly_in.add(body_farther ? b : 0);
  }
  DeviationEstimate out;
  out.method_used = DeviationMethod::RadialCoupling;
  out.delta.value = sphere * coupled.mean();
  out.delta.std_error = sphere * coupled.sem();
  out.delta.samples = samples;
  out.delta.seed = seed;
  out.parts = {sphere * f_body_out.mean(), sphere * f_poly_out.mean(),
               sphere * f_body_in.mean(), sphere * f_poly_in.mean()};
  out.parts_stderr = {sphere * f_body_out.sem(), sphere * f_poly_out.sem(),
                      sphere * f_body_in.sem(), sphere * f_poly_in.sem()};
  return out;
}

DeviationEstimate decomposed_sweep(const ConvexBody& body, const Polytope& poly,
                                   std::int64_t samples, std::uint64_t seed,
                                   std::uint64_t stream) {
  const int n = body.dim();
  const double sphere = sphere_surface(n);
  Rng rng(seed, stream);

  // Containment in P: radial comparison when the origin is interior,
  // otherwise the linear facet scan.
  std::optional<RadialPolytope> rp;
  try {
    rp.emplace(poly);
  } catch (const contract_violation&) {
  }
  auto in_poly = [&](const Vector& x) {
    if (!rp) return poly.contains(x);
    double r = x.norm();
    if (r == 0) return true;
    return r <= rp->radial(x / r) * (1 + 1e-12);
  };

  // Sweep 1: area-uniform importance sampling over bd K via the normal map.
  MeanVar body_diff, f_body_out, f_body_in;
  for (std::int64_t i = 0; i < samples; ++i) {
    Vector u = sample_unit_sphere(n, rng);
    BoundaryPoint bp = body.boundary_point(Direction{u});
    double w = sphere / bp.kappa;
    bool outside = !in_poly(bp.x);
    body_diff.add(outside ? w : -w);
    f_body_out.add(outside ? w : 0);
    f_body_in.add(outside ? 0 : w);
  }

  // Sweep 2: area-uniform sampling over bd P (facet by measure, then flat
  // Dirichlet within the facet).
  std::vector<double> cum(poly.facets.size());
  double area_p = 0;
  for (std::size_t i = 0; i < poly.facets.size(); ++i) {
    area_p += poly.facets[i].measure;
    cum[i] = area_p;
  }
  MeanVar poly_diff, f_poly_out, f_poly_in;
  std::vector<double> w(n);
  for (std::int64_t i = 0; i < samples; ++i) {
    double pick = rng.uniform01() * area_p;
    std::size_t fid =
        std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (fid >= poly.facets.size()) fid = poly.facets.size() - 1;
    const PolytopeFacet& f = poly.facets[fid];
    double total = 0;
    for (int k = 0; k < n; ++k) {
      w[k] = rng.exponential();
      total += w[k];
    }
    Vector x = Vector::Zero(n);
    for (int k = 0; k < n; ++k)
      x += (w[k] / total) * poly.vertices[f.vertex_ids[k]];
    bool outside = !body.contains(x);
    poly_diff.add(outside ? area_p : -area_p);
    f_poly_out.add(outside ? area_p : 0);
    f_poly_in.add(outside ? 0 : area_p);
  }

  DeviationEstimate out;
  out.method_used = DeviationMethod::Decomposed;
  out.delta.value = body_diff.mean() + poly_diff.mean();
  out.delta.std_error = std::hypot(body_diff.sem(), poly_diff.sem());
  out.delta.samples = 2 * samples;
  out.delta.seed = seed;
  out.parts = {f_body_out.mean(), f_poly_out.mean(), f_body_in.mean(),
               f_poly_in.mean()};
  out.parts_stderr = {f_body_out.sem(), f_poly_out.sem(), f_body_in.sem(),
                      f_poly_in.sem()};
  return out;
}

}  // namespace

RadialPolytope::RadialPolytope(const Polytope& poly) : poly_(&poly) {
  if (poly.facets.empty())
    throw contract_violation("RadialPolytope: polytope has no facets");
  double min_off = std::numeric_limits<double>::infinity();
  for (const PolytopeFacet& f : poly.facets) min_off = std::min(min_off, f.offset);
  min_offset_ = min_off;
  if (!(min_off > 1e-9 * poly.coordinate_scale()))
    throw contract_violation(
        "RadialPolytope: origin is not interior to the polytope");
  const int count = static_cast<int>(poly.facets.size());
  int stride = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(count))));
  for (int i = 0; i < count; i += stride) landmarks_.push_back(i);
}

double RadialPolytope::radial(const Vector& unit_v, int* facet_id) const {
  const auto& facets = poly_->facets;
  auto score = [&](int fid) {
    return facets[fid].normal.dot(unit_v) / facets[fid].offset;
  };
  int best = landmarks_[0];
  double best_g = score(best);
  for (std::size_t i = 1; i < landmarks_.size(); ++i) {
    double g = score(landmarks_[i]);
    if (g > best_g) {
      best_g = g;
      best = landmarks_[i];
    }
  }
  for (;;) {
    int next = -1;
    double next_g = best_g;
    for (int nb : facets[best].neighbors) {
      double g = score(nb);
      if (g > next_g) {
        next_g = g;
        next = nb;
      }
    }
    if (next < 0) break;
    best = next;
    best_g = next_g;
  }
  if (!(best_g > 0))
    throw numerical_failure("RadialPolytope: direction sees no facet plane");
  if (facet_id) *facet_id = best;
  return 1.0 / best_g;
}

DeviationEstimate surface_deviation(const ConvexBody& body,
                                    const Polytope& poly,
                                    std::int64_t samples, std::uint64_t seed,
                                    std::uint64_t stream,
                                    DeviationMethod method) {
  check_pair(body, poly, samples);
  DeviationEstimate out;
  if (method == DeviationMethod::Decomposed) {
    out = decomposed_sweep(body, poly, samples, seed, stream);
  } else if (method == DeviationMethod::RadialCoupling) {
    out = radial_sweep(body, poly, samples, seed, stream);
  } else {
    try {
      out = radial_sweep(body, poly, samples, seed, stream);
    } catch (const contract_violation&) {
      out = decomposed_sweep(body, poly, samples, seed, stream);
      out.note =
          "origin is not interior to the polytope; used decomposed sweeps";
    }
  }
  enforce_error_cap(out.delta.value, out.delta.std_error, surface_area(body),
                    "surface_deviation");
  return out;
}

VolumeDeviationEstimate volume_deviation(const ConvexBody& body,
                                         const Polytope& poly,
                                         std::int64_t samples,
                                         std::uint64_t seed,
                                         std::uint64_t stream) {
  check_pair(body, poly, samples);
  const int n = body.dim();
  std::optional<double> vol_k_opt = body.closed_volume();
  double vol_k = vol_k_opt ? *vol_k_opt : body_volume(body);
  double vol_p = poly.volume();
  Rng rng(seed, stream);

  std::optional<RadialPolytope> rp;
  try {
    rp.emplace(poly);
  } catch (const contract_violation&) {
  }
  auto in_poly = [&](const Vector& x) {
    if (!rp) return poly.contains(x);
    double r = x.norm();
    if (r == 0) return true;
    return r <= rp->radial(x / r) * (1 + 1e-12);
  };

  // Uniform draws in K: exact for balls/ellipsoids, support-box rejection
  // for 2-D support curves.
  std::function<Vector()> draw_body;
  if (body.kind() == ConvexBody::Kind::Ball ||
      body.kind() == ConvexBody::Kind::Ellipsoid) {
    std::vector<double> axes;
    if (body.kind() == ConvexBody::Kind::Ball) {
      Vector e1 = Vector::Zero(n);
      e1[0] = 1;
      axes.assign(n, body.support(Direction{e1}));
    } else {
      axes = body.semi_axes();
    }
    draw_body = [n, axes, &rng]() {
      Vector u = sample_unit_sphere(n, rng);
      double radius = std::pow(rng.uniform01(), 1.0 / n);
      Vector x(n);
      for (int c = 0; c < n; ++c) x[c] = u[c] * radius * axes[c];
      return x;
    };
  } else {
    Vector ex(2), ey(2);
    ex << 1, 0;
    ey << 0, 1;
    double xmax = body.support(Direction{ex});
    double xmin = -body.support(Direction{Vector(-ex)});
    double ymax = body.support(Direction{ey});
    double ymin = -body.support(Direction{Vector(-ey)});
    draw_body = [&body, &rng, xmin, xmax, ymin, ymax]() {
      for (int attempt = 0; attempt < 10000; ++attempt) {
        Vector x(2);
        x[0] = xmin + (xmax - xmin) * rng.uniform01();
        x[1] = ymin + (ymax - ymin) * rng.uniform01();
        if (body.contains(x)) return x;
      }
      throw numerical_failure(
          "volume_deviation: rejection sampler starved inside the support box");
    };
  }

  MeanVar body_ind;
  for (std::int64_t i = 0; i < samples; ++i)
    body_ind.add(in_poly(draw_body()) ? 0.0 : 1.0);

  std::vector<double> cum(poly.facets.size());
  double total = 0;
  for (std::size_t i = 0; i < poly.facets.size(); ++i) {
    const PolytopeFacet& f = poly.facets[i];
    total += f.measure * (f.offset - f.normal.dot(poly.interior_point));
    cum[i] = total;
  }
  if (!(total > 0))
    throw numerical_failure("volume_deviation: polytope has non-positive volume");
  MeanVar poly_ind;
  std::vector<double> w(n + 1);
  for (std::int64_t i = 0; i < samples; ++i) {
    double pick = rng.uniform01() * total;
    std::size_t fid =
        std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (fid >= poly.facets.size()) fid = poly.facets.size() - 1;
    const PolytopeFacet& f = poly.facets[fid];
    double wsum = 0;
    for (int k = 0; k <= n; ++k) {
      w[k] = rng.exponential();
      wsum += w[k];
    }
    Vector x = (w[n] / wsum) * poly.interior_point;
    for (int k = 0; k < n; ++k)
      x += (w[k] / wsum) * poly.vertices[f.vertex_ids[k]];
    poly_ind.add(body.contains(x) ? 0.0 : 1.0);
  }

  VolumeDeviationEstimate out;
  out.body_part = vol_k * body_ind.mean();
  out.body_part_stderr = vol_k * body_ind.sem();
  out.poly_part = vol_p * poly_ind.mean();
  out.poly_part_stderr = vol_p * poly_ind.sem();
  out.delta.value = out.body_part + out.poly_part;
  out.delta.std_error = std::hypot(out.body_part_stderr, out.poly_part_stderr);
  out.delta.samples = 2 * samples;
  out.delta.seed = seed;
  enforce_error_cap(out.delta.value, out.delta.std_error, body_volume(body),
                    "volume_deviation");
  return out;
}

}  // namespace polydev
