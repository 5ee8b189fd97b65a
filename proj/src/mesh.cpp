#include "lcn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>

namespace lcn {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

// Parameter of p along segment [a,b] if p lies on it (within tol), else -1.
double on_segment_param(const Vec2& a, const Vec2& b, const Vec2& p,
                        double tol) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = (p - a).dot(d) / len2;
  if (t < -tol || t > 1.0 + tol) return -1.0;
  const Vec2 proj = a + t * d;
  if ((p - proj).norm() > tol * std::sqrt(len2)) return -1.0;
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace

TriMesh TriMesh::build(std::vector<Vec2> vertices,
                       std::vector<std::array<int, 3>> triangles,
                       double domain_area) {
  TriMesh m;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);

  const int nt = m.num_triangles();
  m.areas_.resize(nt);
  m.barycenters_.resize(nt);
  m.shape_grads_.resize(nt);
  m.subdomains_.assign(nt, 0);

  double area_sum = 0.0;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles_[t];
    const Vec2 &a = m.vertices_[tri[0]], &b = m.vertices_[tri[1]],
               &c = m.vertices_[tri[2]];
    const double area = signed_area(a, b, c);
    if (!(area > 0.0))
      throw std::invalid_argument("triangle " + std::to_string(t) +
                                  " is degenerate or not counterclockwise");
    m.areas_[t] = area;
    area_sum += area;
    m.barycenters_[t] = (a + b + c) / 3.0;
    m.h_max_ = std::max({m.h_max_, (b - a).norm(), (c - b).norm(),
                         (a - c).norm()});

    // P1 shape gradients: grad phi_i = perp of opposite edge / (2 area).
    Eigen::Matrix<double, 3, 2>& g = m.shape_grads_[t];
    const Vec2 e0 = c - b, e1 = a - c, e2 = b - a;
    g.row(0) = Vec2(-e0.y(), e0.x()) / (2.0 * area);
    g.row(1) = Vec2(-e1.y(), e1.x()) / (2.0 * area);
    g.row(2) = Vec2(-e2.y(), e2.x()) / (2.0 * area);
  }
  m.total_area_ = area_sum;
  if (std::abs(area_sum - domain_area) > 1e-12 * domain_area)
    throw std::invalid_argument("triangle areas do not sum to domain area");

  // Edge adjacency.
  std::map<std::pair<int, int>, std::vector<int>> edge_tris;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int u = tri[k], v = tri[(k + 1) % 3];
      if (u > v) std::swap(u, v);
      edge_tris[{u, v}].push_back(t);
    }
  }
  for (const auto& [key, tris] : edge_tris) {
    if (tris.size() == 1) {
      m.boundary_.push_back({key.first, key.second, tris[0]});
    } else if (tris.size() == 2) {
      InteriorEdge e;
      e.v0 = key.first;
      e.v1 = key.second;
      const Vec2 &a = m.vertices_[e.v0], &b = m.vertices_[e.v1];
      const Vec2 d = b - a;
      e.length = d.norm();
      e.normal = Vec2(d.y(), -d.x()) / e.length;
      // The left triangle is the one the normal points away from.
      int ta = tris[0], tb = tris[1];
      const auto& tri_a = m.triangles_[ta];
      Vec2 third(0, 0);
      for (int k = 0; k < 3; ++k)
        if (tri_a[k] != e.v0 && tri_a[k] != e.v1) third = m.vertices_[tri_a[k]];
      if ((third - a).dot(e.normal) < 0.0) {
        e.left = ta;
        e.right = tb;
      } else {
        e.left = tb;
        e.right = ta;
      }
      m.interior_.push_back(e);
    } else {
      throw std::invalid_argument("edge shared by more than two triangles");
    }
  }
  return m;
}

void TriMesh::fit_creases(const CreaseSpec& creases) {
  const double tol = 1e-12 + 1e-9 * h_max_;

  std::vector<char> is_crease(interior_.size(), 0);
  for (const auto& [a, b] : creases.segments) {
    const double seg_len = (b - a).norm();
    // Collect edges fully contained in the segment.
    std::vector<std::pair<double, double>> covered;
    for (size_t i = 0; i < interior_.size(); ++i) {
      const Vec2 &p = vertices_[interior_[i].v0],
                 &q = vertices_[interior_[i].v1];
      const double tp = on_segment_param(a, b, p, tol);
      if (tp < 0.0) continue;
      const double tq = on_segment_param(a, b, q, tol);
      if (tq < 0.0) continue;
      is_crease[i] = 1;
      covered.emplace_back(std::min(tp, tq), std::max(tp, tq));
    }
    // Walk the segment: the covered intervals must tile [0,1].
    std::sort(covered.begin(), covered.end());
    double reach = 0.0;
    for (const auto& [lo, hi] : covered) {
      if (lo > reach + tol / seg_len) break;
      reach = std::max(reach, hi);
    }
    if (reach < 1.0 - tol / seg_len)
      throw UnfittedCreaseError("crease segment not covered by mesh edges");
  }
  for (size_t i = 0; i < interior_.size(); ++i)
    interior_[i].crease = is_crease[i] != 0;

  // Label subdomains by flood fill across non-crease interior edges.
  std::vector<std::vector<int>> neighbors(num_triangles());
  for (const auto& e : interior_) {
    if (e.crease) continue;
    neighbors[e.left].push_back(e.right);
    neighbors[e.right].push_back(e.left);
  }
  subdomains_.assign(num_triangles(), -1);
  int label = 0;
  for (int t0 = 0; t0 < num_triangles(); ++t0) {
    if (subdomains_[t0] >= 0) continue;
    std::queue<int> q;
    q.push(t0);
    subdomains_[t0] = label;
    while (!q.empty()) {
      const int t = q.front();
      q.pop();
      for (int s : neighbors[t])
        if (subdomains_[s] < 0) {
          subdomains_[s] = label;
          q.push(s);
        }
    }
    ++label;
  }
  num_subdomains_ = label;
}

void TriMesh::dump(std::ostream& os) const {
  for (const auto& v : vertices_) os << v.x() << " " << v.y() << "\n";
  for (const auto& t : triangles_)
    os << t[0] << " " << t[1] << " " << t[2] << "\n";
}

TriMesh structured_square(int n, const Rect& domain, Pattern pattern) {
  if (n < 1) throw std::invalid_argument("subdivision count must be >= 1");

  const double dx = domain.width() / n, dy = domain.height() / n;
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;

  auto grid = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(domain.xmin + i * dx, domain.ymin + j * dy);

  if (pattern == Pattern::SingleDiagonal) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v00 = grid(i, j), v10 = grid(i + 1, j);
        const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
        tris.push_back({v00, v10, v11});
        tris.push_back({v00, v11, v01});
      }
  } else {
    const int base = static_cast<int>(verts.size());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        verts.emplace_back(domain.xmin + (i + 0.5) * dx,
                           domain.ymin + (j + 0.5) * dy);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v00 = grid(i, j), v10 = grid(i + 1, j);
        const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
        const int c = base + j * n + i;
        tris.push_back({v00, v10, c});
        tris.push_back({v10, v11, c});
        tris.push_back({v11, v01, c});
        tris.push_back({v01, v00, c});
      }
  }
  return TriMesh::build(std::move(verts), std::move(tris), domain.area());
}

TriMesh crease_fitted_square(int n, const Rect& domain,
                             const CreaseSpec& creases) {
  TriMesh mesh = structured_square(n, domain, Pattern::CrissCross);
  mesh.fit_creases(creases);
  return mesh;
}

double distance_to_creases(const CreaseSpec& creases, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : creases.segments) {
    const Vec2 d = b - a;
    const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (a + t * d)).norm());
  }
  return best;
}

std::vector<bool> crease_strip_mask(const TriMesh& mesh,
                                    const CreaseSpec& creases, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("strip half-width must be > 0");
  std::vector<bool> mask(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    mask[t] = distance_to_creases(creases, mesh.barycenter(t)) < d;
  return mask;
}

CreaseSpec diagonal_creases(const Rect& domain) {
  CreaseSpec spec;
  spec.segments.emplace_back(Vec2(domain.xmin, domain.ymin),
                             Vec2(domain.xmax, domain.ymax));
  spec.segments.emplace_back(Vec2(domain.xmin, domain.ymax),
                             Vec2(domain.xmax, domain.ymin));
  return spec;
}

}  // namespace lcn
