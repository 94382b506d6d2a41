#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "xfemopt/mesh.hpp"

namespace xfemopt {

namespace {

// Domain: unit disk minus the open quadrant {x > 0, y < 0}.
bool inside_domain(const Vec2& p) {
  if (p.norm() > 1.0 + kGeomTol) return false;
  return !(p.x() > kGeomTol && p.y() < -kGeomTol);
}

double dist_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (p - a - t * d).norm();
}

// Distance to the boundary, positive inside the domain.
double signed_bdist(const Vec2& p) {
  double d = std::abs(1.0 - p.norm());
  d = std::min(d, dist_to_segment(p, Vec2(0, 0), Vec2(1, 0)));
  d = std::min(d, dist_to_segment(p, Vec2(0, 0), Vec2(0, -1)));
  return inside_domain(p) ? d : -d;
}

Vec2 bdist_gradient(const Vec2& p) {
  const double s = 1e-7;
  const double gx = signed_bdist(p + Vec2(s, 0)) - signed_bdist(p - Vec2(s, 0));
  const double gy = signed_bdist(p + Vec2(0, s)) - signed_bdist(p - Vec2(0, s));
  Vec2 g(gx, gy);
  const double n = g.norm();
  return n > 0 ? Vec2(g / n) : Vec2(0, 1);
}

// Pull a point inward until it sits at least `target` from the boundary.
Vec2 project_inward(Vec2 p, double target) {
  for (int k = 0; k < 8; ++k) {
    const double d = signed_bdist(p);
    if (d >= target) break;
    p += (target - d) * bdist_gradient(p);
  }
  return p;
}

// Incremental Bowyer-Watson triangulation. Sizes here are a few thousand
// points at most, so linear cavity searches are fine.
class Delaunay {
 public:
  struct Tri {
    int a, b, c;
    bool alive = true;
  };

  explicit Delaunay(const std::vector<Vec2>& points) : pts_(points) {
    const int n = static_cast<int>(pts_.size());
    // Deterministic symbolic jitter breaks the exact collinearity of the
    // straight-edge samples and lattice cocircularity; the caller keeps the
    // exact coordinates, only the connectivity is computed on the copies.
    for (int i = 0; i < n; ++i) {
      const auto mix = [](uint64_t x) {
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return x;
      };
      const uint64_t h1 = mix(2 * i + 1), h2 = mix(2 * i + 2);
      pts_[i].x() += 1e-10 * (double(h1 % 2000001) / 1e6 - 1.0);
      pts_[i].y() += 1e-10 * (double(h2 % 2000001) / 1e6 - 1.0);
    }
    pts_.emplace_back(-50.0, -40.0);
    pts_.emplace_back(50.0, -40.0);
    pts_.emplace_back(0.0, 60.0);
    tris_.push_back({n, n + 1, n + 2});
    for (int i = 0; i < n; ++i) insert(i);
  }

  // Triangles not touching the super-triangle vertices.
  std::vector<std::array<int, 3>> triangles() const {
    const int n = static_cast<int>(pts_.size()) - 3;
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.a >= n || t.b >= n || t.c >= n) continue;
      out.push_back({t.a, t.b, t.c});
    }
    return out;
  }

 private:
  bool in_circumcircle(const Tri& t, const Vec2& p) const {
    const Vec2& a = pts_[t.a];
    const Vec2& b = pts_[t.b];
    const Vec2& c = pts_[t.c];
    const double ax = a.x() - p.x(), ay = a.y() - p.y();
    const double bx = b.x() - p.x(), by = b.y() - p.y();
    const double cx = c.x() - p.x(), cy = c.y() - p.y();
    const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                       (bx * bx + by * by) * (ax * cy - cx * ay) +
                       (cx * cx + cy * cy) * (ax * by - bx * ay);
    return det > 0.0;
  }

  void insert(int ip) {
    const Vec2& p = pts_[ip];
    std::map<std::pair<int, int>, int> edge_count;
    std::vector<std::pair<int, int>> cavity_edges;
    for (auto& t : tris_) {
      if (!t.alive || !in_circumcircle(t, p)) continue;
      t.alive = false;
      const std::pair<int, int> edges[3] = {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}};
      for (auto e : edges) {
        auto key = std::minmax(e.first, e.second);
        edge_count[{key.first, key.second}] += 1;
        cavity_edges.push_back(e);
      }
    }
    for (auto e : cavity_edges) {
      auto key = std::minmax(e.first, e.second);
      if (edge_count[{key.first, key.second}] == 1) tris_.push_back({e.first, e.second, ip});
    }
    if (tris_.size() > 8 * pts_.size()) {
      std::erase_if(tris_, [](const Tri& t) { return !t.alive; });
    }
  }

  std::vector<Vec2> pts_;
  std::vector<Delaunay::Tri> tris_;
};

std::vector<std::array<int, 3>> domain_triangulation(const std::vector<Vec2>& pts) {
  auto tris = Delaunay(pts).triangles();
  std::erase_if(tris, [&](const std::array<int, 3>& t) {
    const Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    return !(c.norm() < 1.0) || (c.x() > 0.0 && c.y() < 0.0);
  });
  for (auto& t : tris)
    if (signed_area(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0) std::swap(t[1], t[2]);
  return tris;
}

std::set<std::pair<int, int>> unique_edges(const std::vector<std::array<int, 3>>& tris) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) {
      const auto mm = std::minmax(t[k], t[(k + 1) % 3]);
      edges.insert({mm.first, mm.second});
    }
  return edges;
}

// distmesh-style relaxation: edges push their endpoints apart toward a
// uniform rest length, movable points are pulled back inside when they drift
// into the boundary band.
void relax(std::vector<Vec2>& pts, int n_fixed, double h, int iterations) {
  for (int iter = 0; iter < iterations; ++iter) {
    const auto tris = domain_triangulation(pts);
    const auto edges = unique_edges(tris);
    if (edges.empty()) return;
    double mean_sq = 0.0;
    for (const auto& e : edges) mean_sq += (pts[e.first] - pts[e.second]).squaredNorm();
    mean_sq /= static_cast<double>(edges.size());
    const double rest = 1.2 * std::sqrt(mean_sq);

    std::vector<Vec2> force(pts.size(), Vec2::Zero());
    for (const auto& e : edges) {
      const Vec2 d = pts[e.second] - pts[e.first];
      const double len = d.norm();
      const double f = std::max(rest - len, 0.0);
      if (f <= 0.0 || len <= 0.0) continue;
      const Vec2 push = (f / len) * d;
      force[e.first] -= push;
      force[e.second] += push;
    }
    for (size_t i = n_fixed; i < pts.size(); ++i) {
      pts[i] += 0.2 * force[i];
      if (signed_bdist(pts[i]) < 0.3 * h) pts[i] = project_inward(pts[i], 0.35 * h);
    }
  }
}

struct EdgeStats {
  double min_len = 1e30, max_len = 0.0;
  std::pair<int, int> min_edge{-1, -1}, max_edge{-1, -1};
};

EdgeStats edge_stats(const std::vector<Vec2>& pts, const std::vector<std::array<int, 3>>& tris) {
  EdgeStats s;
  for (const auto& e : unique_edges(tris)) {
    const double len = (pts[e.first] - pts[e.second]).norm();
    if (len < s.min_len) s.min_len = len, s.min_edge = e;
    if (len > s.max_len) s.max_len = len, s.max_edge = e;
  }
  return s;
}

}  // namespace

Mesh build_three_quarter_disk_mesh(double h) {
  if (!(h > 0.0 && h < 1.0)) throw MeshError("disk mesh requires 0 < h < 1");

  std::vector<Vec2> pts;

  // Fixed boundary samples: the 3/4 arc plus the two straight edges.
  const double arc_len = 1.5 * M_PI;
  const int n_arc = std::max(6, static_cast<int>(std::lround(arc_len / h)));
  for (int k = 0; k <= n_arc; ++k) {
    const double phi = arc_len * k / n_arc;
    pts.emplace_back(std::cos(phi), std::sin(phi));
  }
  const int n_edge = std::max(2, static_cast<int>(std::lround(1.0 / h)));
  for (int k = 1; k < n_edge; ++k) pts.emplace_back(1.0 - static_cast<double>(k) / n_edge, 0.0);
  for (int k = 1; k < n_edge; ++k) pts.emplace_back(0.0, -1.0 + static_cast<double>(k) / n_edge);
  pts.emplace_back(0.0, 0.0);  // re-entrant corner
  const int n_fixed = static_cast<int>(pts.size());

  // Interior seeds on a jittered hexagonal lattice, kept clear of the
  // boundary so the fixed samples own the first layer.
  std::mt19937 gen(9001u + static_cast<unsigned>(std::lround(1.0 / h)));
  std::uniform_real_distribution<double> jit(-0.05 * h, 0.05 * h);
  const double row_h = h * std::sqrt(3.0) / 2.0;
  int row = 0;
  for (double y = -1.0; y <= 1.0 + row_h; y += row_h, ++row) {
    const double x0 = -1.0 - (row % 2 ? 0.5 * h : 0.0);
    for (double x = x0; x <= 1.0 + h; x += h) {
      const Vec2 p(x + jit(gen), y + jit(gen));
      if (inside_domain(p) && signed_bdist(p) > 0.55 * h) pts.push_back(p);
    }
  }

  relax(pts, n_fixed, h, 60);

  // Local repair of out-of-band edges, re-relaxing after each change.
  const int max_rounds = 80;
  std::vector<std::array<int, 3>> tris;
  for (int round = 0;; ++round) {
    tris = domain_triangulation(pts);
    const EdgeStats s = edge_stats(pts, tris);
    bool changed = false;
    if (s.min_len < 0.55 * h) {
      int victim = -1;
      if (s.min_edge.second >= n_fixed) victim = s.min_edge.second;
      else if (s.min_edge.first >= n_fixed) victim = s.min_edge.first;
      if (victim < 0) throw MeshError("disk mesher: short edge between fixed boundary nodes");
      pts.erase(pts.begin() + victim);
      changed = true;
    } else if (s.max_len > 1.9 * h) {
      const Vec2 mid = project_inward(0.5 * (pts[s.max_edge.first] + pts[s.max_edge.second]),
                                      0.35 * h);
      pts.push_back(mid);
      changed = true;
    }
    if (!changed) break;
    if (round >= max_rounds) throw MeshError("disk mesher: quality bounds not met");
    relax(pts, n_fixed, h, 10);
  }

  Mesh m;
  m.nodes = pts;
  m.triangles = tris;

  // Every once-shared edge is a boundary edge of the 3/4 disk.
  std::map<std::pair<int, int>, int> incidence;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) {
      const auto mm = std::minmax(t[k], t[(k + 1) % 3]);
      incidence[{mm.first, mm.second}] += 1;
    }
  for (const auto& [e, count] : incidence)
    if (count == 1) m.boundary_edges.push_back({e.first, e.second, BoundaryTag::outer});

  m.validate();

  // Grading bound: adjacent element diameters within a factor of 2.
  std::map<std::pair<int, int>, std::vector<int>> edge_tris;
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      const auto mm = std::minmax(m.triangles[t][k], m.triangles[t][(k + 1) % 3]);
      edge_tris[{mm.first, mm.second}].push_back(t);
    }
  for (const auto& [e, ts] : edge_tris) {
    if (ts.size() != 2) continue;
    const double d0 = m.triangle_diameter(ts[0]), d1 = m.triangle_diameter(ts[1]);
    if (std::max(d0, d1) > 2.0 * std::min(d0, d1) + kGeomTol)
      throw MeshError("disk mesher: grading bound violated");
  }
  return m;
}

}  // namespace xfemopt
