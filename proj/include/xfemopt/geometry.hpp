#ifndef XFEMOPT_GEOMETRY_HPP
#define XFEMOPT_GEOMETRY_HPP

#include <vector>

#include "xfemopt/mesh.hpp"

namespace xfemopt {

using Polygon = std::vector<Vec2>;

double polygon_area(const Polygon& poly);

/// Clips a convex polygon against the half-plane {x : (x - p0) . n >= 0}.
Polygon clip_half_plane(const Polygon& poly, const Vec2& p0, const Vec2& n, double keep_sign);

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c, double tol);

/// Length of the part of segment [s0,s1] inside the closed triangle.
double segment_length_in_triangle(const Vec2& s0, const Vec2& s1, const Vec2& a, const Vec2& b,
                                  const Vec2& c);

/// Node -> incident triangles.
std::vector<std::vector<int>> vertex_adjacency(const Mesh& mesh);

}  // namespace xfemopt

#endif
