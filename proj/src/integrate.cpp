#include "polydev/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polydev {

namespace {

struct MeanVar {
  double sum = 0.0, sumsq = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double sem() const {
    if (n < 2) return 0.0;
    double m = mean();
    double var = (sumsq - n * m * m) / (n - 1);
    return std::sqrt(std::max(0.0, var) / n);
  }
};

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// weight of one boundary point under the chosen parametrization, i.e. the
// Jacobian that converts the sphere measure into dH^{n-1}
double normal_map_jacobian(const BoundaryPoint& bp) { return 1.0 / bp.kappa; }

double radial_jacobian(const RadialSection& rs, const Vector& v) {
  int n = static_cast<int>(v.size());
  double cosg = rs.bp.normal.dot(v);
  return std::pow(rs.rho, n - 1) / cosg;
}

double trapezoid_2d(const std::function<double(double)>& f, int nodes) {
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) s += f(2.0 * kPi * i / nodes);
  return s * 2.0 * kPi / nodes;
}

// deterministic integral over S^2 with a Gauss-Legendre rule in cos(polar)
// and trapezoid in azimuth
double sphere3_product(const std::function<double(const Vector&)>& f,
                       int polar_nodes) {
  std::vector<double> z, wz;
  gauss_legendre(polar_nodes, z, wz);
  int na = 2 * polar_nodes;
  double s = 0.0;
  Vector u(3);
  for (int i = 0; i < polar_nodes; ++i) {
    double st = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
    double row = 0.0;
    for (int j = 0; j < na; ++j) {
      double phi = 2.0 * kPi * j / na;
      u[0] = st * std::cos(phi);
      u[1] = st * std::sin(phi);
      u[2] = z[i];
      row += f(u);
    }
    s += wz[i] * row * (2.0 * kPi / na);
  }
  return s;
}

double integrate_once(const ConvexBody& body, const BoundaryWeight& w,
                      const IntegralMethod& m, int nodes_override,
                      double* sem_out, std::int64_t* n_out) {
  int dim = body.dim();
  if (m.scheme == IntegralMethod::Scheme::MonteCarlo) {
    Rng rng(m.seed, m.stream);
    MeanVar acc;
    if (m.param == IntegralMethod::Param::NormalMap) {
      for (std::int64_t i = 0; i < m.samples; ++i) {
        Direction u(sample_unit_sphere(dim, rng));
        BoundaryPoint bp = body.boundary_point(u);
        acc.add(w(bp) * normal_map_jacobian(bp));
      }
    } else {
      for (std::int64_t i = 0; i < m.samples; ++i) {
        Vector v = sample_unit_sphere(dim, rng);
        RadialSection rs = body.radial_point(v);
        acc.add(w(rs.bp) * radial_jacobian(rs, v));
      }
    }
    double omega = sphere_surface(dim);
    if (sem_out) *sem_out = omega * acc.sem();
    if (n_out) *n_out = acc.n;
    return omega * acc.mean();
  }

  int nodes = nodes_override > 0 ? nodes_override : m.nodes;
  if (dim == 2) {
    if (m.param == IntegralMethod::Param::NormalMap) {
      return trapezoid_2d(
          [&](double theta) {
            Vector u(2);
            u << std::cos(theta), std::sin(theta);
            BoundaryPoint bp = body.boundary_point(Direction(u));
            return w(bp) * normal_map_jacobian(bp);
          },
          nodes);
    }
    return trapezoid_2d(
        [&](double phi) {
          Vector v(2);
          v << std::cos(phi), std::sin(phi);
          RadialSection rs = body.radial_point(v);
          return w(rs.bp) * radial_jacobian(rs, v);
        },
        nodes);
  }
  if (dim == 3) {
    int polar = nodes_override > 0 ? nodes_override : std::min(m.nodes, 256);
    if (m.param == IntegralMethod::Param::NormalMap) {
      return sphere3_product(
          [&](const Vector& u) {
            BoundaryPoint bp = body.boundary_point(Direction(u));
            return w(bp) * normal_map_jacobian(bp);
          },
          polar);
    }
    return sphere3_product(
        [&](const Vector& v) {
          RadialSection rs = body.radial_point(v);
          return w(rs.bp) * radial_jacobian(rs, v);
        },
        polar);
  }
  throw contract_violation(
      "boundary_integral: deterministic rules exist only for n in {2, 3}; "
      "use Monte Carlo");
}

}  // namespace

IntegralMethod IntegralMethod::mc(std::int64_t samples, std::uint64_t seed,
                                  std::uint64_t stream) {
  IntegralMethod m;
  m.param = Param::NormalMap;
  m.scheme = Scheme::MonteCarlo;
  m.samples = samples;
  m.seed = seed;
  m.stream = stream;
  return m;
}

IntegralMethod IntegralMethod::quad2d(int nodes) {
  IntegralMethod m;
  m.param = Param::NormalMap;
  m.scheme = Scheme::Deterministic;
  m.nodes = nodes;
  return m;
}

IntegralMethod IntegralMethod::radial_mc(std::int64_t samples,
                                         std::uint64_t seed,
                                         std::uint64_t stream) {
  IntegralMethod m = mc(samples, seed, stream);
  m.param = Param::Radial;
  return m;
}

IntegralMethod IntegralMethod::radial_quad2d(int nodes) {
  IntegralMethod m = quad2d(nodes);
  m.param = Param::Radial;
  return m;
}

IntegralMethod IntegralMethod::sphere_quad3d(int polar_nodes) {
  IntegralMethod m = quad2d(polar_nodes);
  return m;
}

IntegralMethod IntegralMethod::radial_sphere_quad3d(int polar_nodes) {
  IntegralMethod m = radial_quad2d(polar_nodes);
  return m;
}

IntegralMethod IntegralMethod::standard(int dim, std::uint64_t seed) {
  if (dim == 2) return quad2d();
  return mc(200000, seed);
}

MonteCarloEstimate boundary_integral(const ConvexBody& body,
                                     const BoundaryWeight& w,
                                     const IntegralMethod& method) {
  if (!w) throw contract_violation("boundary_integral: missing weight");
  if (method.scheme == IntegralMethod::Scheme::MonteCarlo && method.samples < 2)
    throw contract_violation("boundary_integral: need at least 2 samples");
  if (method.scheme == IntegralMethod::Scheme::Deterministic && method.nodes < 8)
    throw contract_violation("boundary_integral: need at least 8 nodes");

  MonteCarloEstimate est;
  est.seed = method.seed;
  if (method.scheme == IntegralMethod::Scheme::MonteCarlo) {
    est.value = integrate_once(body, w, method, 0, &est.std_error, &est.samples);
    return est;
  }
  // deterministic rule: the half-resolution difference is a conservative
  // error proxy for these geometrically convergent rules
  double full = integrate_once(body, w, method, 0, nullptr, nullptr);
  int half_nodes = (body.dim() == 2 ? method.nodes : std::min(method.nodes, 256)) / 2;
  double half = integrate_once(body, w, method, half_nodes, nullptr, nullptr);
  est.value = full;
  est.std_error = std::max(std::abs(full - half), 1e-13 * std::abs(full));
  est.samples = method.nodes;
  return est;
}

double sphere_integral_det(int dim, const std::function<double(const Vector&)>& g,
                           int nodes) {
  if (dim == 2) {
    return trapezoid_2d(
        [&](double theta) {
          Vector u(2);
          u << std::cos(theta), std::sin(theta);
          return g(u);
        },
        nodes);
  }
  if (dim == 3) return sphere3_product(g, std::min(nodes, 256));
  throw contract_violation("sphere_integral_det: only n in {2, 3}");
}

double surface_area(const ConvexBody& body) {
  if (auto s = body.closed_surface_area()) return *s;
  int dim = body.dim();
  BoundaryWeight one = [](const BoundaryPoint&) { return 1.0; };
  if (dim == 2)
    return boundary_integral(body, one, IntegralMethod::quad2d()).value;
  if (dim == 3)
    return boundary_integral(body, one, IntegralMethod::sphere_quad3d(192)).value;
  // n in {4, 5}: Monte Carlo with a fixed internal seed keeps this a pure
  // function of the body at the cost of ~1e-3 relative noise
  return boundary_integral(body, one, IntegralMethod::mc(1 << 22, 0xA5EA5EA5ull)).value;
}

double body_volume(const ConvexBody& body) {
  if (auto v = body.closed_volume()) return *v;
  throw contract_violation("body_volume: no volume rule for this body");
}

Vector sample_unit_sphere(int dim, Rng& rng) {
  if (dim < 2) throw contract_violation("sample_unit_sphere: dim must be >= 2");
  Vector v(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
}

std::vector<Vector> probe_directions(int dim, int count) {
  std::vector<Vector> out;
  out.reserve(count);
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      double t = 2.0 * kPi * i / count;
      Vector u(2);
      u << std::cos(t), std::sin(t);
      out.push_back(u);
    }
    return out;
  }
  static const int bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  int pairs = (dim + 1) / 2;
  for (int i = 0; i < count; ++i) {
    Vector u(dim);
    for (int p = 0; p < pairs; ++p) {
      double u1 = radical_inverse(static_cast<std::uint64_t>(i) + 1, bases[2 * p]);
      double u2 = radical_inverse(static_cast<std::uint64_t>(i) + 1, bases[2 * p + 1]);
      u1 = std::max(u1, 1e-12);
      double r = std::sqrt(-2.0 * std::log(u1));
      double z0 = r * std::cos(2.0 * kPi * u2);
      double z1 = r * std::sin(2.0 * kPi * u2);
      u[2 * p] = z0;
      if (2 * p + 1 < dim) u[2 * p + 1] = z1;
    }
    double norm = u.norm();
    if (norm < 1e-8) continue;
    out.push_back(u / norm);
  }
  return out;
}

Density::Density(ConvexBody body, Kind kind, std::string label,
                 std::function<double(const BoundaryPoint&)> pdf)
    : body_(std::move(body)), kind_(kind), label_(std::move(label)),
      pdf_(std::move(pdf)) {
  int probes = body_.dim() == 2 ? 8192 : 100000;
  double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
  for (const Vector& u : probe_directions(body_.dim(), probes)) {
    BoundaryPoint bp = body_.boundary_point(Direction(u));
    double r = pdf_(bp) / bp.kappa;
    if (!(r >= 0.0) || !std::isfinite(r))
      throw contract_violation("Density: pdf/kappa not finite and nonnegative");
    rmax = std::max(rmax, r);
    rmin = std::min(rmin, r);
  }
  if (!(rmax > 0.0)) throw contract_violation("Density: pdf vanishes on the probe grid");
  // 1.1 safety factor guards against between-probe maxima; skip it when the
  // ratio is constant (e.g. uniform density on a ball), where the probe
  // maximum already is the supremum
  envelope_ = (rmax / rmin <= 1.0 + 1e-9) ? rmax : 1.1 * rmax;
}

Density Density::uniform(const ConvexBody& body) {
  double area = surface_area(body);
  return Density(body, Kind::Uniform, "uniform",
                 [area](const BoundaryPoint&) { return 1.0 / area; });
}

Density Density::custom_weight(const ConvexBody& body,
                               std::function<double(double)> weight_of_theta,
                               std::string label) {
  if (body.dim() != 2)
    throw contract_violation("custom densities are only supported for 2-D bodies");
  auto raw = [w = std::move(weight_of_theta)](const BoundaryPoint& bp) {
    double v = w(std::atan2(bp.normal[1], bp.normal[0]));
    if (!(v > 0.0)) throw contract_violation("custom weight must be positive");
    return v;
  };
  double z = boundary_integral(body, raw, IntegralMethod::quad2d()).value;
  return Density(body, Kind::Custom, std::move(label),
                 [raw, z](const BoundaryPoint& bp) { return raw(bp) / z; });
}

Density Density::from_pdf(const ConvexBody& body, Kind kind, std::string label,
                          std::function<double(const BoundaryPoint&)> pdf) {
  return Density(body, kind, std::move(label), std::move(pdf));
}

BoundaryPoint sample_boundary(const ConvexBody& body, const Density& f, Rng& rng) {
  int dim = body.dim();
  double m = f.envelope();
  // expected proposals per draw is M * omega_n; the cap only trips on a
  // broken density
  std::int64_t limit =
      std::max<std::int64_t>(1000, static_cast<std::int64_t>(1e4 * m * sphere_surface(dim)));
  for (std::int64_t it = 0; it < limit; ++it) {
    Direction u(sample_unit_sphere(dim, rng));
    BoundaryPoint bp = body.boundary_point(u);
    double ratio = f(bp) / bp.kappa;
    if (ratio > m * (1.0 + 1e-9))
      throw numerical_failure(
          "sample_boundary: envelope violated (f/kappa = " +
          format_double(ratio) + " > M = " + format_double(m) + ")");
    if (rng.uniform01() * m < ratio) return bp;
  }
  throw numerical_failure("sample_boundary: acceptance stalled; density envelope unusable");
}

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch on the Jacobi matrix of the Legendre three-term recurrence
  Matrix j = Matrix::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k - 1, k) = b;
    j(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  nodes.resize(m);
  weights.resize(m);
  for (int i = 0; i < m; ++i) {
    nodes[i] = es.eigenvalues()[i];
    double v0 = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v0 * v0;
  }
}

}  // namespace polydev
