#ifndef XFEMOPT_MESH_HPP
#define XFEMOPT_MESH_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace xfemopt {

using Vec2 = Eigen::Vector2d;

/// Absolute tolerance for geometric predicates; all domains are O(1) in size.
inline constexpr double kGeomTol = 1e-12;

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BoundaryTag { outer, crack_upper, crack_lower };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

/// Triangulation of a 2D domain. Triangles are counterclockwise node index
/// triples. For meshes fitted to a crack, nodes on the crack are duplicated
/// and the coincident boundary edges carry crack_upper / crack_lower tags.
struct Mesh {
  struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::outer;
  };

  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  std::array<Vec2, 3> triangle_points(int t) const {
    const auto& tri = triangles[t];
    return {nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]};
  }

  double triangle_area(int t) const;
  double triangle_diameter(int t) const;

  /// Checks all structural invariants (orientation, index ranges, edge
  /// incidence counts, boundary completeness). Throws MeshError naming the
  /// offending entity.
  void validate() const;
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Location of the re-entrant corner (or crack tip) and the angular
/// convention for polar coordinates around it.
///
/// theta is swept from the edge with direction angle `edge_angle_start`
/// through the domain interior to the second edge at theta = pi/beta.
/// `sweep` is +1 when the interior sweep is counterclockwise and -1 when it
/// is clockwise. For the crack square the first edge is the upper crack
/// face (sweep -1), so points on the upper face get theta = 0 and points on
/// the lower face theta = 2*pi; the singular function r^beta*sin(beta*theta)
/// then vanishes on both faces.
struct CornerGeometry {
  Vec2 tip = Vec2::Zero();
  double edge_angle_start = 0.0;
  double sweep = 1.0;               // +1 ccw, -1 cw
  double beta = 1.0;                // interior angle is pi/beta
  Vec2 crack_dir = Vec2::Zero();    // unit vector tip -> crack origin (beta = 1/2 only)
  Vec2 crack_origin = Vec2::Zero(); // boundary endpoint of the crack

  bool has_crack() const { return beta == 0.5; }
  /// Unit normal used by the Heaviside sign test (crack geometries only);
  /// points toward the theta = 0 face.
  Vec2 crack_normal() const { return sweep * Vec2(-crack_dir.y(), crack_dir.x()); }
  double theta_max() const { return M_PI / beta; }
};

/// [-1,1]^2 with a crack from (-1,0) to the tip at the origin.
CornerGeometry crack_square_geometry();
/// Unit disk minus the open quadrant {x>0, y<0}; corner at the origin,
/// theta measured counterclockwise from the positive x axis.
CornerGeometry three_quarter_disk_geometry();

/// N x N squares on [-1,1]^2, each split by the top-left -> bottom-right
/// diagonal. Unfitted (N odd): the crack crosses element interiors and the
/// tip lies on the central diagonal edge. Fitted (N even): nodes on the open
/// crack are duplicated; the upper copies keep the original indices.
Mesh build_structured_crack_mesh(int N, bool fitted);

/// Quasi-uniform triangulation of the three-quarter unit disk with target
/// edge length h, built by smoothed Delaunay refinement of a rejection
/// sampled point set with fixed boundary nodes.
Mesh build_three_quarter_disk_mesh(double h);

/// Plain-text interchange format:
///   xfemmesh 1
///   nodes <count>      followed by one "x y" per line
///   triangles <count>  followed by one "i j k" per line (0-based, ccw)
///   boundary <count>   followed by one "i j tag" per line
/// import validates all mesh invariants; export(import(t)) == t up to
/// whitespace.
Mesh import_mesh(std::string_view text);
std::string export_mesh(const Mesh& m);

}  // namespace xfemopt

#endif
