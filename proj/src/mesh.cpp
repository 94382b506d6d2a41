#include "xfemopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace xfemopt {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::outer: return "outer";
    case BoundaryTag::crack_upper: return "crack_upper";
    case BoundaryTag::crack_lower: return "crack_lower";
  }
  return "outer";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
  if (s == "outer") return BoundaryTag::outer;
  if (s == "crack_upper") return BoundaryTag::crack_upper;
  if (s == "crack_lower") return BoundaryTag::crack_lower;
  throw MeshError("unknown boundary tag '" + s + "'");
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double Mesh::triangle_area(int t) const {
  const auto p = triangle_points(t);
  return signed_area(p[0], p[1], p[2]);
}

double Mesh::triangle_diameter(int t) const {
  const auto p = triangle_points(t);
  return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
}

namespace {

std::pair<int, int> sorted_edge(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

void Mesh::validate() const {
  const int nn = num_nodes();
  for (int t = 0; t < num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = triangles[t][k];
      if (v < 0 || v >= nn)
        throw MeshError("triangle " + std::to_string(t) + " references node " + std::to_string(v) +
                        " out of range");
    }
    if (triangle_area(t) <= 0.0)
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
  }

  // Edge incidence: interior edges shared by two triangles, boundary edges by
  // exactly one. Every once-shared edge must be listed in boundary_edges.
  std::map<std::pair<int, int>, int> incidence;
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k) incidence[sorted_edge(tri[k], tri[(k + 1) % 3])] += 1;
  for (const auto& [edge, count] : incidence)
    if (count > 2)
      throw MeshError("edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                      ") shared by " + std::to_string(count) + " triangles");

  std::map<std::pair<int, int>, int> listed;
  for (size_t e = 0; e < boundary_edges.size(); ++e) {
    const auto& be = boundary_edges[e];
    if (be.a < 0 || be.a >= nn || be.b < 0 || be.b >= nn || be.a == be.b)
      throw MeshError("boundary edge " + std::to_string(e) + " references invalid nodes");
    const auto key = sorted_edge(be.a, be.b);
    auto it = incidence.find(key);
    if (it == incidence.end())
      throw MeshError("boundary edge " + std::to_string(e) + " is not an edge of any triangle");
    if (it->second != 1)
      throw MeshError("boundary edge " + std::to_string(e) + " is shared by " +
                      std::to_string(it->second) + " triangles");
    if (++listed[key] > 1) throw MeshError("boundary edge " + std::to_string(e) + " listed twice");
  }
  for (const auto& [edge, count] : incidence)
    if (count == 1 && !listed.count(edge))
      throw MeshError("edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                      ") lies on the boundary but is not listed");
}

CornerGeometry crack_square_geometry() {
  CornerGeometry g;
  g.tip = Vec2(0.0, 0.0);
  g.beta = 0.5;
  g.crack_dir = Vec2(-1.0, 0.0);
  g.crack_origin = Vec2(-1.0, 0.0);
  // First edge = upper crack face; the interior sweep upper -> lower runs
  // clockwise, so theta = 0 on the upper face and 2*pi on the lower face.
  g.edge_angle_start = M_PI;
  g.sweep = -1.0;
  return g;
}

CornerGeometry three_quarter_disk_geometry() {
  CornerGeometry g;
  g.tip = Vec2(0.0, 0.0);
  g.beta = 2.0 / 3.0;
  g.edge_angle_start = 0.0;  // positive x axis
  g.sweep = 1.0;             // interior sweep ccw up to the negative y axis
  return g;
}

Mesh build_structured_crack_mesh(int N, bool fitted) {
  if (N <= 0) throw MeshError("mesh size N must be positive");
  if (fitted && N % 2 != 0) throw MeshError("fitted crack mesh requires even N, got " + std::to_string(N));
  if (!fitted && N % 2 == 0)
    throw MeshError("unfitted crack mesh requires odd N, got " + std::to_string(N));

  Mesh m;
  auto coord = [N](int k) { return -1.0 + 2.0 * k / N; };
  auto node_id = [N](int i, int j) { return j * (N + 1) + i; };

  m.nodes.reserve((N + 1) * (N + 1));
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) m.nodes.emplace_back(coord(i), coord(j));

  // For fitted meshes, duplicate nodes on the open crack {y = 0, -1 <= x < 0}.
  // Originals serve the upper side; duplicates (appended) the lower side.
  std::map<int, int> lower_copy;
  if (fitted) {
    const int j_mid = N / 2;
    for (int i = 0; i < N / 2; ++i) {
      const int orig = node_id(i, j_mid);
      lower_copy[orig] = static_cast<int>(m.nodes.size());
      m.nodes.push_back(m.nodes[orig]);
    }
  }

  // Remap a corner of a below-crack triangle to the lower copy if duplicated.
  auto lower = [&](int v) {
    auto it = lower_copy.find(v);
    return it == lower_copy.end() ? v : it->second;
  };

  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      int bl = node_id(i, j), br = node_id(i + 1, j);
      int tl = node_id(i, j + 1), tr = node_id(i + 1, j + 1);
      const bool below = fitted && j < N / 2;
      if (below) {
        // Square rows below the crack see the lower copies along their top.
        tl = lower(tl);
        tr = lower(tr);
      }
      m.triangles.push_back({tl, bl, br});
      m.triangles.push_back({tl, br, tr});
    }
  }

  const int j_mid = N / 2;  // only meaningful for fitted meshes
  for (int i = 0; i < N; ++i) {
    m.boundary_edges.push_back({node_id(i, 0), node_id(i + 1, 0), BoundaryTag::outer});
    m.boundary_edges.push_back({node_id(i, N), node_id(i + 1, N), BoundaryTag::outer});
  }
  for (int j = 0; j < N; ++j) {
    // The left boundary passes through the crack origin; edges below the
    // crack reference the lower copy of the duplicated node there.
    int a = node_id(0, j), b = node_id(0, j + 1);
    if (fitted && j + 1 <= j_mid) {
      a = lower(a);
      b = lower(b);
    }
    m.boundary_edges.push_back({a, b, BoundaryTag::outer});
    m.boundary_edges.push_back({node_id(N, j), node_id(N, j + 1), BoundaryTag::outer});
  }
  if (fitted) {
    for (int i = 0; i < N / 2; ++i) {
      const int a = node_id(i, j_mid), b = node_id(i + 1, j_mid);
      m.boundary_edges.push_back({a, b, BoundaryTag::crack_upper});
      m.boundary_edges.push_back({lower(a), lower(b), BoundaryTag::crack_lower});
    }
  }

  m.validate();
  return m;
}

}  // namespace xfemopt
