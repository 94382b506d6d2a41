#include "xfemopt/enrichment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xfemopt/geometry.hpp"

namespace xfemopt {

std::string to_string(Method m) {
  switch (m) {
    case Method::cut_xfem: return "cut";
    case Method::classic_xfem: return "classic";
    case Method::p1_plain: return "p1";
  }
  return "cut";
}

std::pair<double, double> cutoff_eval(const CutoffSpec& spec, double r) {
  if (r <= spec.r0) return {1.0, 0.0};
  if (r >= spec.r1) return {0.0, 0.0};
  const double w = spec.r1 - spec.r0;
  const double t = (r - spec.r0) / w;
  const double chi = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  const double dchi = -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
  return {chi, dchi};
}

namespace {

double wrap_2pi(double x) {
  double t = std::fmod(x, 2.0 * M_PI);
  if (t < 0.0) t += 2.0 * M_PI;
  return t;
}

}  // namespace

PolarCoords polar_coords(const Vec2& p, const CornerGeometry& geom, FaceSide side) {
  PolarCoords pc;
  const Vec2 d = p - geom.tip;
  pc.r = d.norm();
  if (pc.r < kGeomTol) {
    pc.at_tip = true;
    return pc;
  }
  const double tmax = geom.theta_max();
  if (side != FaceSide::automatic && geom.has_crack()) {
    // Only meaningful for points on the crack line; force the face value.
    pc.theta = side == FaceSide::upper ? 0.0 : tmax;
    return pc;
  }
  double theta = wrap_2pi(geom.sweep * (std::atan2(d.y(), d.x()) - geom.edge_angle_start));
  if (theta > tmax) {
    // Snap roundoff overshoot back onto the nearest corner edge.
    theta = (theta - tmax < 2.0 * M_PI - theta) ? tmax : 0.0;
  }
  pc.theta = theta;
  return pc;
}

SingularEval singular_eval(double beta, double r, double theta, const CornerGeometry& geom) {
  SingularEval s;
  if (r <= 0.0) return s;  // value 0; gradient undefined at the tip
  const double rb = std::pow(r, beta);
  s.value = rb * std::sin(beta * theta);
  const double phi = geom.edge_angle_start + geom.sweep * theta;
  const Vec2 e_r(std::cos(phi), std::sin(phi));
  const Vec2 e_t = geom.sweep * Vec2(-std::sin(phi), std::cos(phi));
  const double c = beta * rb / r;
  s.gradient = c * (std::sin(beta * theta) * e_r + std::cos(beta * theta) * e_t);
  return s;
}

int heaviside(const Vec2& p, const CornerGeometry& geom) {
  return (p - geom.tip).dot(geom.crack_normal()) >= 0.0 ? 1 : -1;
}

namespace {

// The crack segment runs from the tip to its boundary origin.
struct CrackSegment {
  Vec2 a, b;  // tip, origin
  Vec2 n;     // normal for side tests
};

CrackSegment crack_segment(const CornerGeometry& geom) {
  return {geom.tip, geom.crack_origin, geom.crack_normal()};
}

}  // namespace

DofMap classify_nodes(const Mesh& mesh, const CornerGeometry& geom,
                      const EnrichmentConfig& config) {
  const int nn = mesh.num_nodes();
  DofMap dm;
  dm.heaviside_entry_of_node.assign(nn, -1);
  dm.singular_entry_of_node.assign(nn, -1);
  dm.node_on_strong_boundary.assign(nn, 0);

  for (const auto& be : mesh.boundary_edges) {
    dm.node_on_strong_boundary[be.a] = 1;
    dm.node_on_strong_boundary[be.b] = 1;
  }

  {
    // The tip must lie in the closed domain.
    bool tip_inside = false;
    for (int t = 0; t < mesh.num_triangles() && !tip_inside; ++t) {
      const auto p = mesh.triangle_points(t);
      tip_inside = point_in_triangle(geom.tip, p[0], p[1], p[2], 1e-9);
    }
    if (!tip_inside) throw MeshError("corner tip lies outside the mesh");
  }

  const bool crack = geom.has_crack() && config.method != Method::p1_plain;
  const bool classic = config.method == Method::classic_xfem;
  const bool cut = config.method == Method::cut_xfem;

  if (classic) {
    for (int v = 0; v < nn; ++v)
      if ((mesh.nodes[v] - geom.tip).norm() <= config.r_s + kGeomTol) dm.theta_S.push_back(v);
    for (int v : dm.theta_S)
      if (dm.node_on_strong_boundary[v]) {
        dm.warnings.push_back("enrichment radius r_s reaches the boundary");
        break;
      }
  }

  if (crack) {
    const auto adj = vertex_adjacency(mesh);
    const CrackSegment seg = crack_segment(geom);
    for (int v = 0; v < nn; ++v) {
      const auto& tris = adj[v];
      if (tris.empty()) continue;
      bool tip_in_support = false;
      bool segment_hits = false;
      double area_pos = 0.0, area_neg = 0.0, area_total = 0.0;
      for (int t : tris) {
        const auto p = mesh.triangle_points(t);
        const double at = std::abs(signed_area(p[0], p[1], p[2]));
        area_total += at;
        if (point_in_triangle(geom.tip, p[0], p[1], p[2], 1e-9)) tip_in_support = true;
        if (segment_length_in_triangle(seg.a, seg.b, p[0], p[1], p[2]) > kGeomTol)
          segment_hits = true;
        const Polygon tri{p[0], p[1], p[2]};
        area_pos += std::abs(polygon_area(clip_half_plane(tri, seg.a, seg.n, 1.0)));
        area_neg += std::abs(polygon_area(clip_half_plane(tri, seg.a, seg.n, -1.0)));
      }
      // "Completely cut": the crack traverses the support, the tip stays
      // outside, and both pieces carry non-negligible area.
      if (!tip_in_support && segment_hits &&
          std::min(area_pos, area_neg) >= 1e-10 * area_total)
        dm.theta_H.push_back(v);
    }
  }

  for (int v = 0; v < nn; ++v) dm.entries.push_back({DofKind::standard, v});
  for (int v : dm.theta_H) {
    dm.heaviside_entry_of_node[v] = dm.size();
    dm.entries.push_back({DofKind::heaviside, v});
  }
  for (int v : dm.theta_S) {
    dm.singular_entry_of_node[v] = dm.size();
    dm.entries.push_back({DofKind::nodal_singular, v});
  }
  if (cut) {
    dm.global_entry = dm.size();
    dm.entries.push_back({DofKind::global_singular, -1});
  }

  // Constrain every entry with a nonzero trace on the strong boundary.
  // Standard and Heaviside basis functions at boundary nodes always have one;
  // singular enrichments vanish identically on the corner edges, so their
  // traces are sampled.
  dm.constrained.assign(dm.size(), 0);
  auto boundary_trace_nonzero = [&](int node_filter, bool global) {
    for (const auto& be : mesh.boundary_edges) {
      if (!global && be.a != node_filter && be.b != node_filter) continue;
      for (int k = 1; k <= 3; ++k) {
        const Vec2 x = mesh.nodes[be.a] + (k / 4.0) * (mesh.nodes[be.b] - mesh.nodes[be.a]);
        const PolarCoords pc = polar_coords(x, geom);
        double val = singular_eval(geom.beta, pc.r, pc.theta, geom).value;
        if (global) val *= cutoff_eval(config.cutoff, pc.r).first;
        // Hat factor for nodal enrichment: linear along the edge.
        if (!global) {
          const double lam = be.a == node_filter ? 1.0 - k / 4.0 : k / 4.0;
          val *= lam;
        }
        if (std::abs(val) > 1e-10) return true;
      }
    }
    return false;
  };

  for (int e = 0; e < dm.size(); ++e) {
    const auto& en = dm.entries[e];
    switch (en.kind) {
      case DofKind::standard:
      case DofKind::heaviside:
        dm.constrained[e] = dm.node_on_strong_boundary[en.node];
        break;
      case DofKind::nodal_singular:
        dm.constrained[e] =
            dm.node_on_strong_boundary[en.node] && boundary_trace_nonzero(en.node, false);
        break;
      case DofKind::global_singular:
        dm.constrained[e] = boundary_trace_nonzero(-1, true);
        break;
    }
  }

  dm.free_index.assign(dm.size(), -1);
  for (int e = 0; e < dm.size(); ++e)
    if (!dm.constrained[e]) {
      dm.free_index[e] = static_cast<int>(dm.free_entries.size());
      dm.free_entries.push_back(e);
    }
  return dm;
}

void shape_eval(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                const EnrichmentConfig& config, int element, const Vec2& point, FaceSide side,
                std::vector<ShapeValue>& out) {
  out.clear();
  const auto& tri = mesh.triangles[element];
  const auto p = mesh.triangle_points(element);
  const double inv2a = 1.0 / (2.0 * signed_area(p[0], p[1], p[2]));

  double lambda[3];
  Vec2 grad_lambda[3];
  for (int k = 0; k < 3; ++k) {
    const Vec2& b = p[(k + 1) % 3];
    const Vec2& c = p[(k + 2) % 3];
    lambda[k] = 2.0 * signed_area(point, b, c) * inv2a;
    grad_lambda[k] = inv2a * Vec2(b.y() - c.y(), c.x() - b.x());
  }

  const bool need_polar = config.method == Method::cut_xfem ||
                          (config.method == Method::classic_xfem && !dofmap.theta_S.empty());
  PolarCoords pc;
  SingularEval sing;
  if (need_polar) {
    pc = polar_coords(point, geom, side);
    if (!pc.at_tip) sing = singular_eval(geom.beta, pc.r, pc.theta, geom);
  }

  int H = 0;
  for (int k = 0; k < 3; ++k) {
    const int v = tri[k];
    out.push_back({v, lambda[k], grad_lambda[k]});
    const int he = dofmap.heaviside_entry_of_node[v];
    if (he >= 0) {
      if (H == 0) {
        H = side == FaceSide::automatic ? heaviside(point, geom)
                                        : (side == FaceSide::upper ? 1 : -1);
      }
      out.push_back({he, lambda[k] * H, grad_lambda[k] * static_cast<double>(H)});
    }
    const int se = dofmap.singular_entry_of_node[v];
    if (se >= 0)
      out.push_back({se, lambda[k] * sing.value, grad_lambda[k] * sing.value + lambda[k] * sing.gradient});
  }

  if (dofmap.global_entry >= 0) {
    if (pc.at_tip || pc.r >= config.cutoff.r1) {
      out.push_back({dofmap.global_entry, 0.0, Vec2::Zero()});
    } else {
      const auto [chi, dchi] = cutoff_eval(config.cutoff, pc.r);
      const double phi = geom.edge_angle_start + geom.sweep * pc.theta;
      const Vec2 e_r(std::cos(phi), std::sin(phi));
      out.push_back(
          {dofmap.global_entry, chi * sing.value, chi * sing.gradient + dchi * sing.value * e_r});
    }
  }
}

}  // namespace xfemopt
