#include "polydev/hull.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"

namespace polydev {

namespace {

// Raised when the floating-point visibility predicates contradict each other
// (e.g. a horizon that does not close up).  The caller retries once with a
// jittered copy of the input before giving up.
struct hull_inconsistency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double coordinate_scale_of(const std::vector<Vector>& pts) {
  double s = 0;
  for (const Vector& p : pts) s = std::max(s, p.lpNorm<Eigen::Infinity>());
  return s > 0 ? s : 1.0;
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Unit normal of the hyperplane through the n affinely independent points
// `ids`, plus its offset.  The sign is chosen afterwards by the caller.
void hyperplane(const std::vector<Vector>& pts, const std::vector<int>& ids,
                int n, Vector* normal, double* offset) {
  Matrix edges(n, n - 1);
  for (int j = 1; j < n; ++j) edges.col(j - 1) = pts[ids[j]] - pts[ids[0]];
  Eigen::HouseholderQR<Matrix> qr(edges);
  Matrix q = qr.householderQ();
  *normal = q.col(n - 1);
  *offset = normal->dot(pts[ids[0]]);
}

double simplex_measure(const std::vector<Vector>& pts,
                       const std::vector<int>& ids, int n) {
  Matrix edges(n, n - 1);
  for (int j = 1; j < n; ++j) edges.col(j - 1) = pts[ids[j]] - pts[ids[0]];
  Matrix gram = edges.transpose() * edges;
  double det = gram.determinant();
  if (det < 0) det = 0;
  return std::sqrt(det) / factorial(n - 1);
}

struct BuildFacet {
  std::vector<int> vtx;       // n point indices
  std::vector<int> nbr;       // nbr[i] across the ridge omitting vtx[i]
  Vector normal;
  double offset = 0;
  std::vector<int> conflicts; // points assigned to this facet (single witness)
  int far_pt = -1;
  double far_d = 0;
  bool alive = true;
};

class Builder {
 public:
  Builder(const std::vector<Vector>& pts, int n)
      : pts_(pts), n_(n), scale_(coordinate_scale_of(pts)),
        eps_vis_(1e-10 * scale_), eps_flat_(1e-11 * scale_) {}

  // Returns the ids of the alive facets; vertex ids refer to pts_.
  std::vector<BuildFacet> run() {
    initial_simplex();
    while (!pending_.empty()) {
      int fid = *pending_.begin();
      pending_.erase(pending_.begin());
      if (!facets_[fid].alive || facets_[fid].conflicts.empty()) continue;
      insert_apex(fid);
    }
    std::vector<BuildFacet> out;
    for (BuildFacet& f : facets_)
      if (f.alive) out.push_back(std::move(f));
    return out;
  }

 private:
  double dist(const BuildFacet& f, int p) const {
    return f.normal.dot(pts_[p]) - f.offset;
  }

  // Plane through `vtx` oriented away from the interior reference point.
  void oriented_plane(BuildFacet* f) const {
    hyperplane(pts_, f->vtx, n_, &f->normal, &f->offset);
    double side = f->normal.dot(inside_ref_) - f->offset;
    if (side > 0) {
      f->normal = -f->normal;
      f->offset = -f->offset;
      side = -side;
    }
    if (side > -eps_flat_)
      throw hull_inconsistency("facet plane passes through the interior reference");
  }

  void assign_conflict(int fid, int p) {
    BuildFacet& f = facets_[fid];
    double d = dist(f, p);
    f.conflicts.push_back(p);
    if (d > f.far_d) {
      f.far_d = d;
      f.far_pt = p;
    }
  }

  void initial_simplex() {
    const int npts = static_cast<int>(pts_.size());
    // Lexicographically smallest point anchors the simplex.
    int first = 0;
    for (int i = 1; i < npts; ++i) {
      for (int c = 0; c < n_; ++c) {
        if (pts_[i][c] < pts_[first][c]) { first = i; break; }
        if (pts_[i][c] > pts_[first][c]) break;
      }
    }
    std::vector<int> chosen = {first};
    std::vector<Vector> basis;  // orthonormal directions already spanned
    for (int k = 0; k < n_; ++k) {
      int best = -1;
      double best_d = 0;
      for (int i = 0; i < npts; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
        Vector r = pts_[i] - pts_[first];
        for (const Vector& b : basis) r -= b.dot(r) * b;
        double d = r.norm();
        if (d > best_d) { best_d = d; best = i; }
      }
      if (best < 0 || best_d <= 1e-10 * scale_)
        throw degenerate_hull_error(
            "convex_hull: input is affinely degenerate (rank < dim)");
      Vector r = pts_[best] - pts_[first];
      for (const Vector& b : basis) r -= b.dot(r) * b;
      basis.push_back(r / r.norm());
      chosen.push_back(best);
    }

    inside_ref_ = Vector::Zero(n_);
    for (int id : chosen) inside_ref_ += pts_[id];
    inside_ref_ /= static_cast<double>(n_ + 1);

    for (int skip = 0; skip <= n_; ++skip) {
      BuildFacet f;
      for (int j = 0; j <= n_; ++j)
        if (j != skip) f.vtx.push_back(chosen[j]);
      oriented_plane(&f);
      f.nbr.assign(n_, -1);
      facets_.push_back(std::move(f));
    }
    link_ridges(0, static_cast<int>(facets_.size()));

    std::vector<char> is_vertex(npts, 0);
    for (int id : chosen) is_vertex[id] = 1;
    for (int p = 0; p < npts; ++p) {
      if (is_vertex[p]) continue;
      for (std::size_t fid = 0; fid < facets_.size(); ++fid) {
        if (dist(facets_[fid], p) > eps_vis_) {
          assign_conflict(static_cast<int>(fid), p);
          break;
        }
      }
    }
    for (std::size_t fid = 0; fid < facets_.size(); ++fid)
      if (!facets_[fid].conflicts.empty()) pending_.insert(static_cast<int>(fid));
  }

  // Mutually links every ridge among facets_[lo..hi); each ridge must be
  // shared by exactly two of them.
  void link_ridges(int lo, int hi) {
    std::map<std::vector<int>, std::pair<int, int>> open;  // ridge -> (fid, slot)
    for (int fid = lo; fid < hi; ++fid) {
      BuildFacet& f = facets_[fid];
      for (int s = 0; s < n_; ++s) {
        if (f.nbr[s] >= 0) continue;
        std::vector<int> key;
        for (int j = 0; j < n_; ++j)
          if (j != s) key.push_back(f.vtx[j]);
        std::sort(key.begin(), key.end());
        auto it = open.find(key);
        if (it == open.end()) {
          open.emplace(std::move(key), std::make_pair(fid, s));
        } else {
          facets_[it->second.first].nbr[it->second.second] = fid;
          f.nbr[s] = it->second.first;
          open.erase(it);
        }
      }
    }
    if (!open.empty())
      throw hull_inconsistency("ridge left open while stitching new facets");
  }

  void insert_apex(int witness) {
    const int apex = facets_[witness].far_pt;
    if (apex < 0) throw hull_inconsistency("conflict list without a far point");

    // Flood-fill the facets visible from the apex; everything else that we
    // touch from inside the region is a horizon neighbor.
    std::vector<int> visible;
    std::vector<std::array<int, 3>> horizon;  // (visible fid, slot, hidden fid)
    std::deque<int> queue = {witness};
    std::map<int, char> state;  // 1 = visible, 2 = hidden
    state[witness] = 1;
    while (!queue.empty()) {
      int fid = queue.front();
      queue.pop_front();
      visible.push_back(fid);
      for (int s = 0; s < n_; ++s) {
        int g = facets_[fid].nbr[s];
        if (g < 0) throw hull_inconsistency("missing neighbor during flood fill");
        auto it = state.find(g);
        char st;
        if (it == state.end()) {
          st = dist(facets_[g], apex) > eps_vis_ ? 1 : 2;
          state[g] = st;
          if (st == 1) queue.push_back(g);
        } else {
          st = it->second;
        }
        if (st == 2) horizon.push_back({fid, s, g});
      }
    }
    if (horizon.empty())
      throw hull_inconsistency("apex sees every facet (horizon is empty)");

    for (int fid : visible) facets_[fid].alive = false;

    const int new_lo = static_cast<int>(facets_.size());
    for (const auto& h : horizon) {
      const BuildFacet& old = facets_[h[0]];
      BuildFacet f;
      for (int j = 0; j < n_; ++j)
        if (j != h[1]) f.vtx.push_back(old.vtx[j]);
      f.vtx.push_back(apex);
      oriented_plane(&f);
      f.nbr.assign(n_, -1);
      f.nbr[n_ - 1] = h[2];  // across the ridge omitting the apex
      facets_.push_back(std::move(f));

      // Re-point the hidden neighbor at the replacement facet.
      BuildFacet& hidden = facets_[h[2]];
      bool patched = false;
      for (int t = 0; t < n_; ++t) {
        if (hidden.nbr[t] == h[0]) {
          hidden.nbr[t] = static_cast<int>(facets_.size()) - 1;
          patched = true;
          break;
        }
      }
      if (!patched) throw hull_inconsistency("horizon neighbor link is one-sided");
    }
    const int new_hi = static_cast<int>(facets_.size());
    link_ridges(new_lo, new_hi);

    // Hand the orphaned conflict points to whichever new facet sees them;
    // points seeing none are interior to the enlarged hull and are dropped.
    for (int fid : visible) {
      for (int p : facets_[fid].conflicts) {
        if (p == apex) continue;
        for (int g = new_lo; g < new_hi; ++g) {
          if (dist(facets_[g], p) > eps_vis_) {
            assign_conflict(g, p);
            break;
          }
        }
      }
      facets_[fid].conflicts.clear();
      facets_[fid].conflicts.shrink_to_fit();
      pending_.erase(fid);
    }
    for (int g = new_lo; g < new_hi; ++g)
      if (!facets_[g].conflicts.empty()) pending_.insert(g);
  }

  const std::vector<Vector>& pts_;
  const int n_;
  const double scale_;
  const double eps_vis_;
  const double eps_flat_;
  Vector inside_ref_;
  std::vector<BuildFacet> facets_;
  std::set<int> pending_;
};

// Turns the builder output into a Polytope, recomputing all planes and
// measures from the coordinates in `pts` (which are the original, unjittered
// ones even when the build ran on a jittered copy).
Polytope assemble(const std::vector<Vector>& pts, int n,
                  std::vector<BuildFacet> raw, bool verify_planes) {
  std::vector<int> used;
  for (const BuildFacet& f : raw)
    for (int id : f.vtx) used.push_back(id);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::vector<int> remap(pts.size(), -1);
  for (std::size_t i = 0; i < used.size(); ++i) remap[used[i]] = static_cast<int>(i);

  // The builder indexes facets into the full array including dead ones;
  // rebuild neighbor ids against the compacted facet list.
  std::map<std::vector<int>, std::pair<int, int>> ridge;
  Polytope poly;
  poly.dim = n;
  for (int id : used) poly.vertices.push_back(pts[id]);
  poly.interior_point = Vector::Zero(n);
  for (const Vector& v : poly.vertices) poly.interior_point += v;
  poly.interior_point /= static_cast<double>(poly.vertices.size());

  for (const BuildFacet& f : raw) {
    PolytopeFacet pf;
    for (int id : f.vtx) pf.vertex_ids.push_back(remap[id]);
    hyperplane(poly.vertices, pf.vertex_ids, n, &pf.normal, &pf.offset);
    double side = pf.normal.dot(poly.interior_point) - pf.offset;
    if (side > 0) {
      pf.normal = -pf.normal;
      pf.offset = -pf.offset;
    }
    pf.measure = simplex_measure(poly.vertices, pf.vertex_ids, n);
    pf.neighbors.assign(n, -1);
    poly.facets.push_back(std::move(pf));
  }
  for (std::size_t fid = 0; fid < poly.facets.size(); ++fid) {
    PolytopeFacet& f = poly.facets[fid];
    for (int s = 0; s < n; ++s) {
      if (f.neighbors[s] >= 0) continue;
      std::vector<int> key;
      for (int j = 0; j < n; ++j)
        if (j != s) key.push_back(f.vertex_ids[j]);
      std::sort(key.begin(), key.end());
      auto it = ridge.find(key);
      if (it == ridge.end()) {
        ridge.emplace(std::move(key), std::make_pair(static_cast<int>(fid), s));
      } else {
        poly.facets[it->second.first].neighbors[it->second.second] =
            static_cast<int>(fid);
        f.neighbors[s] = it->second.first;
        ridge.erase(it);
      }
    }
  }
  if (!ridge.empty())
    throw hull_inconsistency("compacted hull has unmatched ridges");

  if (verify_planes) {
    // After a jittered build the combinatorics may not describe a convex
    // hull of the original coordinates; reject anything visibly non-convex.
    double tol = 1e-8 * coordinate_scale_of(poly.vertices);
    for (const PolytopeFacet& f : poly.facets)
      for (const Vector& v : poly.vertices)
        if (f.normal.dot(v) - f.offset > tol)
          throw hull_inconsistency("jittered hull is not convex on the original points");
  }
  return poly;
}

}  // namespace

double Polytope::surface_area() const {
  double s = 0;
  for (const PolytopeFacet& f : facets) s += f.measure;
  return s;
}

double Polytope::volume() const {
  double v = 0;
  for (const PolytopeFacet& f : facets)
    v += f.measure * (f.offset - f.normal.dot(interior_point));
  return v / dim;
}

double Polytope::coordinate_scale() const { return coordinate_scale_of(vertices); }

bool Polytope::contains(const Vector& p, double rel_tol) const {
  if (p.size() != dim)
    throw contract_violation("Polytope::contains: point dimension mismatch");
  double tol = rel_tol * coordinate_scale();
  for (const PolytopeFacet& f : facets)
    if (f.normal.dot(p) - f.offset > tol) return false;
  return true;
}

void Polytope::check_combinatorics() const {
  const int n = dim;
  const int nv = static_cast<int>(vertices.size());
  if (n < 2 || nv < n + 1 || static_cast<int>(facets.size()) < n + 1)
    throw numerical_failure("polytope: too few vertices or facets");
  std::map<std::vector<int>, int> ridge_count;
  for (const PolytopeFacet& f : facets) {
    if (static_cast<int>(f.vertex_ids.size()) != n)
      throw numerical_failure("polytope: facet is not an (n-1)-simplex");
    std::vector<int> sorted_ids = f.vertex_ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    if (std::unique(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end())
      throw numerical_failure("polytope: facet repeats a vertex");
    for (int id : sorted_ids)
      if (id < 0 || id >= nv)
        throw numerical_failure("polytope: facet vertex id out of range");
    for (int s = 0; s < n; ++s) {
      std::vector<int> key;
      for (int j = 0; j < n; ++j)
        if (j != s) key.push_back(f.vertex_ids[j]);
      std::sort(key.begin(), key.end());
      ++ridge_count[key];
    }
  }
  for (const auto& [key, count] : ridge_count)
    if (count != 2)
      throw numerical_failure("polytope: ridge not shared by exactly two facets");
  for (std::size_t fid = 0; fid < facets.size(); ++fid) {
    const PolytopeFacet& f = facets[fid];
    if (static_cast<int>(f.neighbors.size()) != n)
      throw numerical_failure("polytope: facet neighbor list has wrong size");
    for (int s = 0; s < n; ++s) {
      int g = f.neighbors[s];
      if (g < 0 || g >= static_cast<int>(facets.size()) ||
          g == static_cast<int>(fid))
        throw numerical_failure("polytope: facet neighbor id out of range");
      // The neighbor must contain the shared ridge (all vertices but vtx[s]).
      const std::vector<int>& other = facets[g].vertex_ids;
      int shared = 0;
      for (int j = 0; j < n; ++j) {
        if (j == s) continue;
        if (std::find(other.begin(), other.end(), f.vertex_ids[j]) != other.end())
          ++shared;
      }
      if (shared != n - 1)
        throw numerical_failure("polytope: neighbor does not share the ridge");
    }
  }
}

Polytope convex_hull(const std::vector<Vector>& points, int dim,
                     std::uint64_t seed) {
  if (dim < 2 || dim > 5)
    throw contract_violation("convex_hull: dim must be between 2 and 5");
  if (static_cast<int>(points.size()) < dim + 1)
    throw contract_violation("convex_hull: need at least dim+1 points");
  for (const Vector& p : points) {
    if (p.size() != dim)
      throw contract_violation("convex_hull: point dimension mismatch");
    if (!p.allFinite())
      throw contract_violation("convex_hull: point has a non-finite coordinate");
  }

  try {
    Builder b(points, dim);
    return assemble(points, dim, b.run(), /*verify_planes=*/false);
  } catch (const hull_inconsistency&) {
    // One retry on a deterministically jittered copy; the output polytope
    // still uses the original coordinates.
    double scale = coordinate_scale_of(points);
    Rng rng(seed, derive_stream(0x4A177E8ULL));
    std::vector<Vector> moved = points;
    for (Vector& p : moved)
      for (int c = 0; c < dim; ++c)
        p[c] += 1e-9 * scale * (2.0 * rng.uniform01() - 1.0);
    try {
      Builder b(moved, dim);
      std::vector<BuildFacet> raw = b.run();
      // Planes/measures must come from the true coordinates.
      Polytope poly = assemble(points, dim, std::move(raw), /*verify_planes=*/true);
      return poly;
    } catch (const hull_inconsistency& e) {
      throw degenerate_hull_error(
          std::string("convex_hull: predicates stay inconsistent after jitter (") +
          e.what() + ")");
    }
  }
}

Vector sample_on_facet(const Polytope& poly, int facet_id, Rng& rng) {
  if (facet_id < 0 || facet_id >= static_cast<int>(poly.facets.size()))
    throw contract_violation("sample_on_facet: facet id out of range");
  const PolytopeFacet& f = poly.facets[facet_id];
  const int n = poly.dim;
  std::vector<double> w(n);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    w[i] = rng.exponential();
    total += w[i];
  }
  Vector x = Vector::Zero(n);
  for (int i = 0; i < n; ++i) x += (w[i] / total) * poly.vertices[f.vertex_ids[i]];
  return x;
}

Vector sample_in_polytope(const Polytope& poly, Rng& rng) {
  const int n = poly.dim;
  std::vector<double> cum(poly.facets.size());
  double total = 0;
  for (std::size_t i = 0; i < poly.facets.size(); ++i) {
    const PolytopeFacet& f = poly.facets[i];
    total += f.measure * (f.offset - f.normal.dot(poly.interior_point));
    cum[i] = total;
  }
  if (!(total > 0))
    throw numerical_failure("sample_in_polytope: non-positive volume");
  double u = rng.uniform01() * total;
  std::size_t pick =
      std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
  if (pick >= poly.facets.size()) pick = poly.facets.size() - 1;

  const PolytopeFacet& f = poly.facets[pick];
  std::vector<double> w(n + 1);
  double wsum = 0;
  for (int i = 0; i <= n; ++i) {
    w[i] = rng.exponential();
    wsum += w[i];
  }
  Vector x = (w[n] / wsum) * poly.interior_point;
  for (int i = 0; i < n; ++i) x += (w[i] / wsum) * poly.vertices[f.vertex_ids[i]];
  return x;
}

std::string polytope_to_json(const Polytope& poly) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["dim"] = poly.dim;
  j["interior_point"] = std::vector<double>(
      poly.interior_point.data(), poly.interior_point.data() + poly.dim);
  nlohmann::json verts = nlohmann::json::array();
  for (const Vector& v : poly.vertices)
    verts.push_back(std::vector<double>(v.data(), v.data() + poly.dim));
  j["vertices"] = std::move(verts);
  nlohmann::json facets = nlohmann::json::array();
  for (const PolytopeFacet& f : poly.facets) {
    nlohmann::json jf;
    jf["vertex_ids"] = f.vertex_ids;
    jf["normal"] = std::vector<double>(f.normal.data(), f.normal.data() + poly.dim);
    jf["offset"] = f.offset;
    jf["measure"] = f.measure;
    facets.push_back(std::move(jf));
  }
  j["facets"] = std::move(facets);
  return j.dump();
}

Polytope polytope_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw contract_violation(std::string("polytope JSON does not parse: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != 1)
      throw contract_violation("polytope JSON: unsupported schema_version");
    Polytope poly;
    poly.dim = j.at("dim").get<int>();
    if (poly.dim < 2 || poly.dim > 5)
      throw contract_violation("polytope JSON: dim out of range");
    const int n = poly.dim;
    auto read_vec = [n](const nlohmann::json& a) {
      if (!a.is_array() || static_cast<int>(a.size()) != n)
        throw contract_violation("polytope JSON: coordinate arity mismatch");
      Vector v(n);
      for (int i = 0; i < n; ++i) v[i] = a[i].get<double>();
      return v;
    };
    poly.interior_point = read_vec(j.at("interior_point"));
    for (const auto& a : j.at("vertices")) poly.vertices.push_back(read_vec(a));
    for (const auto& jf : j.at("facets")) {
      PolytopeFacet f;
      f.vertex_ids = jf.at("vertex_ids").get<std::vector<int>>();
      f.normal = read_vec(jf.at("normal"));
      f.offset = jf.at("offset").get<double>();
      f.measure = jf.at("measure").get<double>();
      f.neighbors.assign(n, -1);
      poly.facets.push_back(std::move(f));
    }
    // Neighbor links are not serialized; rebuild them from the ridges.
    std::map<std::vector<int>, std::pair<int, int>> ridge;
    for (std::size_t fid = 0; fid < poly.facets.size(); ++fid) {
      PolytopeFacet& f = poly.facets[fid];
      for (int s = 0; s < n; ++s) {
        if (f.neighbors[s] >= 0) continue;
        std::vector<int> key;
        for (int jx = 0; jx < n; ++jx)
          if (jx != s) key.push_back(f.vertex_ids[jx]);
        std::sort(key.begin(), key.end());
        auto it = ridge.find(key);
        if (it == ridge.end()) {
          ridge.emplace(std::move(key), std::make_pair(static_cast<int>(fid), s));
        } else {
          poly.facets[it->second.first].neighbors[it->second.second] =
              static_cast<int>(fid);
          f.neighbors[s] = it->second.first;
          ridge.erase(it);
        }
      }
    }
    if (!ridge.empty())
      throw contract_violation("polytope JSON: facet ridges do not close up");
    poly.check_combinatorics();
    return poly;
  } catch (const nlohmann::json::exception& e) {
    throw contract_violation(std::string("polytope JSON: ") + e.what());
  }
}

}  // namespace polydev
