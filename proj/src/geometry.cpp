#include "xfemopt/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace xfemopt {

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Polygon clip_half_plane(const Polygon& poly, const Vec2& p0, const Vec2& n, double keep_sign) {
  Polygon out;
  const size_t m = poly.size();
  if (m == 0) return out;
  auto side = [&](const Vec2& p) { return keep_sign * (p - p0).dot(n); };
  for (size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    const double sa = side(a), sb = side(b);
    if (sa >= 0.0) out.push_back(a);
    if ((sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0)) {
      const double t = sa / (sa - sb);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c, double tol) {
  const double area = signed_area(a, b, c);
  const double s0 = signed_area(p, a, b);
  const double s1 = signed_area(p, b, c);
  const double s2 = signed_area(p, c, a);
  const double lim = -tol * std::abs(area);
  return s0 >= lim && s1 >= lim && s2 >= lim;
}

double segment_length_in_triangle(const Vec2& s0, const Vec2& s1, const Vec2& a, const Vec2& b,
                                  const Vec2& c) {
  // Clip the segment parameter range [0,1] against the three edge half-planes.
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = s1 - s0;
  const Vec2 verts[3] = {a, b, c};
  const double orient = signed_area(a, b, c) > 0.0 ? 1.0 : -1.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2& p = verts[k];
    const Vec2& q = verts[(k + 1) % 3];
    const Vec2 edge = q - p;
    const Vec2 inward = orient * Vec2(-edge.y(), edge.x());
    const double f0 = (s0 - p).dot(inward);
    const double fd = d.dot(inward);
    if (std::abs(fd) < 1e-300) {
      if (f0 < 0.0) return 0.0;
      continue;
    }
    const double t = -f0 / fd;
    if (fd > 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
  }
  return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

std::vector<std::vector<int>> vertex_adjacency(const Mesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangles[t]) adj[v].push_back(t);
  return adj;
}

}  // namespace xfemopt
