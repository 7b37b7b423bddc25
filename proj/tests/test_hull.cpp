#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "polydev/common.hpp"
#include "polydev/hull.hpp"
#include "polydev/integrate.hpp"
#include "polydev/rng.hpp"

using namespace polydev;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector vec3(double x, double y, double z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

std::vector<Vector> cross_polytope_vertices(int n) {
  std::vector<Vector> pts;
  for (int i = 0; i < n; ++i) {
    Vector p = Vector::Zero(n);
    p[i] = 1;
    pts.push_back(p);
    pts.push_back(-p);
  }
  return pts;
}

std::vector<Vector> gaussian_cloud(int n, int count, std::uint64_t stream) {
  Rng rng(31u, stream);
  std::vector<Vector> pts;
  for (int i = 0; i < count; ++i) {
    Vector p(n);
    for (int c = 0; c < n; ++c) p[c] = rng.normal();
    pts.push_back(p);
  }
  return pts;
}

std::vector<Vector> sphere_cloud(int n, int count, std::uint64_t stream) {
  Rng rng(77u, stream);
  std::vector<Vector> pts;
  for (int i = 0; i < count; ++i) pts.push_back(sample_unit_sphere(n, rng));
  return pts;
}

// Vertex coordinate multiset, sorted, for comparing hulls structurally.
std::vector<std::vector<double>> sorted_vertex_list(const Polytope& p) {
  std::vector<std::vector<double>> out;
  for (const Vector& v : p.vertices)
    out.emplace_back(v.data(), v.data() + p.dim);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("square hull with interior and boundary clutter") {
  std::vector<Vector> pts = {vec2(0, 0), vec2(1, 0), vec2(1, 1), vec2(0, 1)};
  pts.push_back(vec2(0.5, 0.5));
  pts.push_back(vec2(0.25, 0.75));
  pts.push_back(vec2(0.5, 0.0));   // on an edge: not a vertex
  pts.push_back(vec2(1, 0));       // duplicate of a corner
  Polytope h = convex_hull(pts, 2);
  CHECK(h.vertices.size() == 4);
  CHECK(h.facets.size() == 4);
  CHECK(h.surface_area() == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(h.volume() == doctest::Approx(1.0).epsilon(1e-13));
  for (const PolytopeFacet& f : h.facets)
    CHECK(f.measure == doctest::Approx(1.0).epsilon(1e-13));
  h.check_combinatorics();
  for (const Vector& p : pts) CHECK(h.contains(p, 1e-9));
  CHECK_FALSE(h.contains(vec2(1.0 + 1e-6, 0.5)));
}

TEST_CASE("integer grid: exact collinear ties resolve to the four corners") {
  std::vector<Vector> pts;
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; j <= 5; ++j) pts.push_back(vec2(i, j));
  Polytope h = convex_hull(pts, 2);
  CHECK(h.vertices.size() == 4);
  CHECK(h.surface_area() == doctest::Approx(20.0).epsilon(1e-13));
  CHECK(h.volume() == doctest::Approx(25.0).epsilon(1e-13));
}

TEST_CASE("regular 64-gon: all cocircular points stay vertices") {
  std::vector<Vector> pts;
  const int m = 64;
  for (int k = 0; k < m; ++k) {
    double t = 2 * kPi * k / m;
    pts.push_back(vec2(2 * std::cos(t), 2 * std::sin(t)));
  }
  Polytope h = convex_hull(pts, 2);
  CHECK(static_cast<int>(h.vertices.size()) == m);
  double perimeter = 2 * m * 2 * std::sin(kPi / m);
  double area = 0.5 * m * 4 * std::sin(2 * kPi / m);
  CHECK(h.surface_area() == doctest::Approx(perimeter).epsilon(1e-12));
  CHECK(h.volume() == doctest::Approx(area).epsilon(1e-12));
  h.check_combinatorics();
}

TEST_CASE("octahedron: exact areas, volume, containment") {
  Polytope h = convex_hull(cross_polytope_vertices(3), 3);
  CHECK(h.vertices.size() == 6);
  CHECK(h.facets.size() == 8);
  CHECK(h.surface_area() == doctest::Approx(4 * std::sqrt(3.0)).epsilon(1e-13));
  CHECK(h.volume() == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  for (const PolytopeFacet& f : h.facets) {
    CHECK(f.measure == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-13));
    CHECK(std::abs(f.offset) == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-13));
  }
  h.check_combinatorics();
  CHECK(h.contains(vec3(0.3, 0.3, 0.3)));
  CHECK(h.contains(vec3(1.0 / 3, 1.0 / 3, 1.0 / 3)));  // on a facet plane
  CHECK_FALSE(h.contains(vec3(0.35, 0.35, 0.35)));
  CHECK(h.contains(vec3(1, 0, 0)));  // vertex
}

TEST_CASE("random tetrahedron matches determinant and cross-product oracles") {
  Rng rng(5u, 9u);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Vector> pts;
    for (int i = 0; i < 4; ++i) {
      Vector p(3);
      for (int c = 0; c < 3; ++c) p[c] = 2 * rng.uniform01() - 1;
      pts.push_back(p);
    }
    Matrix e(3, 3);
    for (int i = 0; i < 3; ++i) e.col(i) = pts[i + 1] - pts[0];
    double vol = std::abs(e.determinant()) / 6;
    if (vol < 1e-3) continue;  // skip nearly flat draws
    double area = 0;
    for (int skip = 0; skip < 4; ++skip) {
      std::vector<Vector> tri;
      for (int i = 0; i < 4; ++i)
        if (i != skip) tri.push_back(pts[i]);
      Eigen::Vector3d a = tri[1] - tri[0], b = tri[2] - tri[0];
      area += 0.5 * a.cross(b).norm();
    }
    Polytope h = convex_hull(pts, 3);
    CHECK(h.volume() == doctest::Approx(vol).epsilon(1e-12));
    CHECK(h.surface_area() == doctest::Approx(area).epsilon(1e-12));
  }
}

TEST_CASE("cross-polytopes in dimensions 4 and 5") {
  Polytope h4 = convex_hull(cross_polytope_vertices(4), 4);
  CHECK(h4.facets.size() == 16);
  CHECK(h4.volume() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(h4.surface_area() == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
  h4.check_combinatorics();

  Polytope h5 = convex_hull(cross_polytope_vertices(5), 5);
  CHECK(h5.facets.size() == 32);
  CHECK(h5.volume() == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
  CHECK(h5.surface_area() ==
        doctest::Approx(4 * std::sqrt(5.0) / 3).epsilon(1e-12));
  h5.check_combinatorics();
}

TEST_CASE("every input point ends up inside the hull") {
  struct Cfg { int n; int count; };
  for (Cfg cfg : {Cfg{2, 500}, Cfg{3, 500}, Cfg{4, 150}, Cfg{5, 80}}) {
    std::vector<Vector> pts = gaussian_cloud(cfg.n, cfg.count, 100 + cfg.n);
    Polytope h = convex_hull(pts, cfg.n);
    h.check_combinatorics();
    for (const Vector& p : pts) CHECK(h.contains(p, 1e-8));
    CHECK(h.volume() > 0);
  }
}

TEST_CASE("hull is idempotent on its own vertices") {
  std::vector<Vector> pts = gaussian_cloud(3, 300, 55);
  Polytope h = convex_hull(pts, 3);
  Polytope h2 = convex_hull(h.vertices, 3);
  CHECK(sorted_vertex_list(h) == sorted_vertex_list(h2));
  CHECK(h2.volume() == doctest::Approx(h.volume()).epsilon(1e-12));
  CHECK(h2.surface_area() == doctest::Approx(h.surface_area()).epsilon(1e-12));
}

TEST_CASE("adding points moves the hull monotonically") {
  std::vector<Vector> pts = gaussian_cloud(3, 120, 56);
  Polytope h = convex_hull(pts, 3);
  double vol = h.volume();

  std::vector<Vector> with_interior = pts;
  with_interior.push_back(0.25 * h.interior_point + 0.75 * h.vertices[0]);
  with_interior.push_back(h.interior_point);
  Polytope h_in = convex_hull(with_interior, 3);
  CHECK(h_in.volume() == doctest::Approx(vol).epsilon(1e-12));

  std::vector<Vector> with_exterior = pts;
  with_exterior.push_back(vec3(50, 1, 2));
  Polytope h_out = convex_hull(with_exterior, 3);
  CHECK(h_out.volume() > vol + 1.0);
  CHECK(h_out.contains(vec3(50, 1, 2)));
}

TEST_CASE("strictly convex samples are all extreme") {
  std::vector<Vector> circle = sphere_cloud(2, 1000, 7);
  CHECK(convex_hull(circle, 2).vertices.size() == 1000);
  std::vector<Vector> sphere = sphere_cloud(3, 1500, 8);
  CHECK(convex_hull(sphere, 3).vertices.size() == 1500);
}

TEST_CASE("dense sphere hull approaches the sphere's area and volume") {
  std::vector<Vector> pts = sphere_cloud(3, 10000, 21);
  Polytope h = convex_hull(pts, 3);
  CHECK(h.vertices.size() == pts.size());
  h.check_combinatorics();
  // Expected area deficit at N = 1e4 is about 24*pi/N ~ 7.5e-3.
  CHECK(h.surface_area() == doctest::Approx(4 * kPi).epsilon(2e-3));
  CHECK(h.volume() == doctest::Approx(4 * kPi / 3).epsilon(2e-3));
  CHECK(h.surface_area() < 4 * kPi);
  CHECK(h.volume() < 4 * kPi / 3);
}

TEST_CASE("degenerate inputs are rejected") {
  std::vector<Vector> line;
  for (int i = 0; i < 50; ++i) line.push_back(vec2(i * 0.1, 2 * i * 0.1));
  CHECK_THROWS_AS(convex_hull(line, 2), degenerate_hull_error);

  std::vector<Vector> plane;
  Rng rng(3u, 4u);
  for (int i = 0; i < 60; ++i) {
    double a = rng.normal(), b = rng.normal();
    plane.push_back(vec3(a, b, 2 * a - b));
  }
  CHECK_THROWS_AS(convex_hull(plane, 3), degenerate_hull_error);

  CHECK_THROWS_AS(convex_hull({vec2(0, 0), vec2(1, 1)}, 2), contract_violation);
  CHECK_THROWS_AS(convex_hull({vec3(0, 0, 0)}, 7), contract_violation);
}

TEST_CASE("JSON round trip preserves the polytope exactly") {
  Polytope h = convex_hull(gaussian_cloud(3, 60, 77), 3);
  std::string text = polytope_to_json(h);
  Polytope back = polytope_from_json(text);
  CHECK(back.dim == h.dim);
  CHECK(back.vertices.size() == h.vertices.size());
  CHECK(back.facets.size() == h.facets.size());
  CHECK(polytope_to_json(back) == text);  // byte-stable through a round trip
  for (std::size_t i = 0; i < h.facets.size(); ++i) {
    CHECK(back.facets[i].vertex_ids == h.facets[i].vertex_ids);
    CHECK(back.facets[i].offset == h.facets[i].offset);
    CHECK(back.facets[i].measure == h.facets[i].measure);
    CHECK((back.facets[i].normal - h.facets[i].normal).norm() == 0.0);
  }
  CHECK(back.volume() == doctest::Approx(h.volume()).epsilon(1e-15));
  back.check_combinatorics();

  CHECK_THROWS_AS(polytope_from_json("not json"), contract_violation);
  CHECK_THROWS_AS(polytope_from_json("{\"schema_version\": 2}"), contract_violation);
  // A tampered vertex id breaks ridge closure.
  std::string bad = text;
  auto pos = bad.find("\"vertex_ids\":[");
  REQUIRE(pos != std::string::npos);
  bad.replace(pos + 14, 1, "9");
  CHECK_THROWS_AS(polytope_from_json(bad), contract_violation);
}

TEST_CASE("facet sampling is uniform in barycentric coordinates") {
  Polytope h = convex_hull(cross_polytope_vertices(3), 3);
  // Locate the facet on the plane x + y + z = 1.
  int fid = -1;
  for (std::size_t i = 0; i < h.facets.size(); ++i) {
    Vector ones = Vector::Constant(3, 1.0 / std::sqrt(3.0));
    if ((h.facets[i].normal - ones).norm() < 1e-12) fid = static_cast<int>(i);
  }
  REQUIRE(fid >= 0);
  Rng rng(11u, 3u);
  const int m = 20000;
  double mean = 0, sq = 0;
  for (int i = 0; i < m; ++i) {
    Vector x = sample_on_facet(h, fid, rng);
    CHECK(std::abs(x.sum() - 1.0) < 1e-12);  // stays on the facet plane
    CHECK(x.minCoeff() > -1e-12);
    mean += x[0];
    sq += x[0] * x[0];
  }
  mean /= m;
  sq /= m;
  // Dirichlet(1,1,1) marginals: mean 1/3, variance 1/18.
  CHECK(mean == doctest::Approx(1.0 / 3).epsilon(0.02));
  CHECK(sq - mean * mean == doctest::Approx(1.0 / 18).epsilon(0.05));
}

TEST_CASE("volume sampling is uniform over a cube") {
  std::vector<Vector> corners;
  for (int b = 0; b < 8; ++b)
    corners.push_back(vec3(b & 1, (b >> 1) & 1, (b >> 2) & 1));
  Polytope h = convex_hull(corners, 3);
  CHECK(h.volume() == doctest::Approx(1.0).epsilon(1e-13));
  Rng rng(13u, 5u);
  const int m = 30000;
  Vector mean = Vector::Zero(3);
  double sq = 0;
  for (int i = 0; i < m; ++i) {
    Vector x = sample_in_polytope(h, rng);
    CHECK(h.contains(x, 1e-9));
    mean += x;
    sq += x[0] * x[0];
  }
  mean /= m;
  for (int c = 0; c < 3; ++c) CHECK(mean[c] == doctest::Approx(0.5).epsilon(0.02));
  double var = sq / m - mean[0] * mean[0];
  CHECK(var == doctest::Approx(1.0 / 12).epsilon(0.05));
}
