#include "xfemopt/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "xfemopt/geometry.hpp"

namespace xfemopt {

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void QuadratureRule::append(const QuadratureRule& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

namespace {

// Symmetric rules on the reference triangle in barycentric orbits
// (Dunavant / Radon tables restricted to positive-weight members).
struct Orbit {
  int type;  // 1: centroid, 21: (a,a,1-2a) x3, 111: (a,b,1-a-b) x6
  double a, b, w;
};

const Orbit kDeg1[] = {{1, 0, 0, 1.0}};
const Orbit kDeg2[] = {{21, 1.0 / 6.0, 0, 1.0 / 3.0}};
const Orbit kDeg4[] = {
    {21, 0.445948490915965, 0, 0.223381589678011},
    {21, 0.091576213509771, 0, 0.109951743655322},
};
const Orbit kDeg5[] = {
    {1, 0, 0, 0.225},
    {21, 0.470142064105115, 0, 0.132394152788506},
    {21, 0.101286507323456, 0, 0.125939180544827},
};
const Orbit kDeg6[] = {
    {21, 0.249286745170910, 0, 0.116786275726379},
    {21, 0.063089014491502, 0, 0.050844906370207},
    {111, 0.310352451033785, 0.053145049844816, 0.082851075618374},
};
struct RefRule {
  const Orbit* orbits;
  int n;
};

RefRule reference_rule(int degree) {
  switch (degree) {
    case 1: return {kDeg1, 1};
    case 2: return {kDeg2, 1};
    case 3:
    case 4: return {kDeg4, 2};
    case 5: return {kDeg5, 3};
    case 6: return {kDeg6, 3};
    default: throw QuadratureError("unsupported quadrature degree " + std::to_string(degree));
  }
}

void push_barycentric(QuadratureRule& rule, const TrianglePoints& tri, double l0, double l1,
                      double l2, double w_area) {
  rule.points.push_back(l0 * tri[0] + l1 * tri[1] + l2 * tri[2]);
  rule.weights.push_back(w_area);
}

// Conical product rules (Gauss-Legendre x Gauss-Jacobi(1,0) on the collapsed
// square): n x n points, all weights positive, exact to degree 2n-1.
struct Conical {
  const double *u, *wu, *v, *wv;
  int n;
};

const double kU5[] = {0.046910077030668018, 0.23076534494715845, 0.5, 0.7692346550528415,
                      0.95308992296933193};
const double kWu5[] = {0.11846344252809449, 0.23931433524968326, 0.2844444444444445,
                       0.23931433524968326, 0.11846344252809449};
const double kV5[] = {0.039809857051468722, 0.19801341787360821, 0.43797481024738616,
                      0.69546427335363614, 0.90146491420117358};
const double kWv5[] = {0.096781590226651476, 0.16717463809436969, 0.14638698708466985,
                       0.073908870072616678, 0.015747914521692299};
const double kU6[] = {0.033765242898423975, 0.16939530676686776, 0.38069040695840151,
                      0.61930959304159849, 0.83060469323313224, 0.96623475710157603};
const double kWu6[] = {0.085662246189585081, 0.18038078652406928, 0.2339569672863456,
                       0.2339569672863456, 0.18038078652406928, 0.085662246189585081};
const double kV6[] = {0.029316427159784941, 0.1480785996684843, 0.3369846902811543,
                      0.55867151877155019, 0.7692338620300545, 0.92694567131974104};
const double kWv6[] = {0.072310330725508895, 0.13554249723151868, 0.14079255378819883,
                       0.098661150890655205, 0.043955165550508962, 0.0087383018136095291};

QuadratureRule conical_rule(const TrianglePoints& tri, const Conical& c) {
  const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
  QuadratureRule rule;
  rule.points.reserve(c.n * c.n);
  rule.weights.reserve(c.n * c.n);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) {
      const double x = c.u[i] * (1.0 - c.v[j]);
      const double y = c.v[j];
      rule.points.push_back((1.0 - x - y) * tri[0] + x * tri[1] + y * tri[2]);
      rule.weights.push_back(2.0 * area * c.wu[i] * c.wv[j]);
    }
  return rule;
}

}  // namespace

QuadratureRule standard_rule(const TrianglePoints& tri, int degree) {
  if (degree < 1 || degree > 10)
    throw QuadratureError("unsupported quadrature degree " + std::to_string(degree));
  if (degree >= 9) return conical_rule(tri, {kU6, kWu6, kV6, kWv6, 6});
  if (degree >= 7) return conical_rule(tri, {kU5, kWu5, kV5, kWv5, 5});
  const RefRule ref = reference_rule(degree);
  const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
  QuadratureRule rule;
  for (int i = 0; i < ref.n; ++i) {
    const Orbit& o = ref.orbits[i];
    const double w = o.w * area;
    switch (o.type) {
      case 1:
        push_barycentric(rule, tri, 1.0 / 3, 1.0 / 3, 1.0 / 3, w);
        break;
      case 21: {
        const double a = o.a, c = 1.0 - 2.0 * a;
        push_barycentric(rule, tri, a, a, c, w);
        push_barycentric(rule, tri, a, c, a, w);
        push_barycentric(rule, tri, c, a, a, w);
        break;
      }
      case 111: {
        const double a = o.a, b = o.b, c = 1.0 - a - b;
        push_barycentric(rule, tri, a, b, c, w);
        push_barycentric(rule, tri, a, c, b, w);
        push_barycentric(rule, tri, b, a, c, w);
        push_barycentric(rule, tri, b, c, a, w);
        push_barycentric(rule, tri, c, a, b, w);
        push_barycentric(rule, tri, c, b, a, w);
        break;
      }
    }
  }
  return rule;
}

namespace {

constexpr int kTailLayers = 28;  // shrinking fan continued onto the tip

// Graded rule on one fan triangle (apex exactly at the tip). The layer rules
// run two degrees above the requested exactness; combined with the band and
// 4-way splits below this puts r^(-1) and r^(-1/2) integrands at ~1e-9
// relative for degree 6.
void graded_fan_rule(QuadratureRule& rule, const Vec2& tip, const Vec2& a, const Vec2& b,
                     int levels, int degree) {
  degree = std::min(degree + 2, 10);
  const int total = levels + kTailLayers;
  double s_outer = 1.0;
  for (int k = 0; k < total; ++k) {
    const double s_inner = 0.5 * s_outer;
    // Each level is split into two radial bands (the integrand varies
    // fastest radially) and every band trapezoid into four triangles; this
    // keeps the per-level error of r^(2 beta - 2) integrands near 1e-9.
    const double s_mid = s_outer * M_SQRT1_2;
    const double scales[3] = {s_outer, s_mid, s_inner};
    for (int band = 0; band < 2; ++band) {
      const Vec2 a0 = tip + scales[band] * (a - tip), b0 = tip + scales[band] * (b - tip);
      const Vec2 a1 = tip + scales[band + 1] * (a - tip), b1 = tip + scales[band + 1] * (b - tip);
      const TrianglePoints half[2] = {{a0, b0, b1}, {a0, b1, a1}};
      for (const auto& t : half) {
        const Vec2 m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
        rule.append(standard_rule({t[0], m01, m20}, degree));
        rule.append(standard_rule({m01, t[1], m12}, degree));
        rule.append(standard_rule({m20, m12, t[2]}, degree));
        rule.append(standard_rule({m01, m12, m20}, degree));
      }
    }
    s_outer = s_inner;
  }
  // The remaining core has relative mass ~2^-(levels+40) even against r^-1
  // integrands and is dropped.
}

// Fan a convex polygon around the tip (on its closure) and grade each fan
// triangle toward it.
void graded_polygon_rule(QuadratureRule& rule, const Polygon& poly, const Vec2& tip, int levels,
                         int degree) {
  const size_t n = poly.size();
  const double scale = std::sqrt(std::abs(polygon_area(poly)));
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (std::abs(signed_area(tip, a, b)) < 1e-14 * std::max(1.0, scale)) continue;
    graded_fan_rule(rule, tip, a, b, levels, degree);
  }
}

void fan_polygon_rule(QuadratureRule& rule, const Polygon& poly, int degree) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : poly) c += p;
  c /= static_cast<double>(poly.size());
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    if (std::abs(signed_area(c, a, b)) < 1e-300) continue;
    rule.append(standard_rule({c, a, b}, degree));
  }
}

bool tip_on_closure(const Polygon& poly, const Vec2& tip, double tol) {
  // Inside test for a convex ccw polygon.
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (signed_area(a, b, tip) < -tol) return false;
  }
  return true;
}

Polygon oriented(Polygon poly) {
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

}  // namespace

QuadratureRule tip_graded_rule(const TrianglePoints& tri, const CornerGeometry& geom, int levels,
                               int degree) {
  if (!is_tip_element(tri, geom)) throw QuadratureError("tip lies outside the element");
  QuadratureRule rule;
  graded_polygon_rule(rule, oriented(Polygon{tri[0], tri[1], tri[2]}), geom.tip, levels, degree);
  return rule;
}

QuadratureRule cut_element_rule(const TrianglePoints& tri, const CornerGeometry& geom, int degree) {
  if (!is_cut_element(tri, geom)) throw QuadratureError("crack does not cross the element");
  const Vec2 n = geom.crack_normal();
  const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
  const Polygon whole = oriented(Polygon{tri[0], tri[1], tri[2]});

  Polygon pieces[2] = {clip_half_plane(whole, geom.tip, n, 1.0),
                       clip_half_plane(whole, geom.tip, n, -1.0)};
  const double areas[2] = {std::abs(polygon_area(pieces[0])), std::abs(polygon_area(pieces[1]))};

  QuadratureRule rule;
  if (std::min(areas[0], areas[1]) < 1e-14) {
    // Sliver merged into the dominant side: treat the element as uncut.
    rule = standard_rule(tri, degree);
    return rule;
  }
  const bool tip_here = is_tip_element(tri, geom);
  for (const auto& piece : pieces) {
    if (piece.size() < 3) continue;
    const Polygon p = oriented(piece);
    if (tip_here && tip_on_closure(p, geom.tip, 1e-12 * std::sqrt(area)))
      graded_polygon_rule(rule, p, geom.tip, 12, degree);
    else
      fan_polygon_rule(rule, p, degree);
  }
  return rule;
}

bool is_tip_element(const TrianglePoints& tri, const CornerGeometry& geom) {
  return point_in_triangle(geom.tip, tri[0], tri[1], tri[2], 1e-9);
}

bool is_cut_element(const TrianglePoints& tri, const CornerGeometry& geom) {
  if (!geom.has_crack()) return false;
  // The crack segment must cross the open element: positive clipped length
  // with its midpoint strictly inside.
  const Vec2 s0 = geom.tip, s1 = geom.crack_origin;
  const double len = segment_length_in_triangle(s0, s1, tri[0], tri[1], tri[2]);
  const double diam = std::max({(tri[1] - tri[0]).norm(), (tri[2] - tri[1]).norm(),
                                (tri[0] - tri[2]).norm()});
  if (len < 1e-12 * diam) return false;

  // Recover the clipped parameter interval midpoint.
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = s1 - s0;
  const double orient = signed_area(tri[0], tri[1], tri[2]) > 0.0 ? 1.0 : -1.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2& p = tri[k];
    const Vec2& q = tri[(k + 1) % 3];
    const Vec2 inward = orient * Vec2(-(q - p).y(), (q - p).x());
    const double f0 = (s0 - p).dot(inward);
    const double fd = d.dot(inward);
    if (std::abs(fd) < 1e-300) continue;
    const double t = -f0 / fd;
    if (fd > 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
  }
  if (t1 <= t0) return false;
  const Vec2 mid = s0 + 0.5 * (t0 + t1) * d;
  const double a_full = std::abs(signed_area(tri[0], tri[1], tri[2]));
  const double b0 = signed_area(mid, tri[0], tri[1]) * orient;
  const double b1 = signed_area(mid, tri[1], tri[2]) * orient;
  const double b2 = signed_area(mid, tri[2], tri[0]) * orient;
  return std::min({b0, b1, b2}) > 1e-10 * a_full;
}

QuadratureRule select_rule(const Mesh& mesh, int element, const CornerGeometry& geom,
                           const EnrichmentConfig& config, RulePurpose purpose) {
  const TrianglePoints tri = mesh.triangle_points(element);
  const int up = purpose == RulePurpose::error_norm ? 2 : 0;

  const bool tip = is_tip_element(tri, geom);
  const bool cut = config.method != Method::p1_plain && is_cut_element(tri, geom);
  if (cut) return cut_element_rule(tri, geom, 6 + up);
  if (tip) return tip_graded_rule(tri, geom, 12, 6 + up);

  // Distance range from the element to the tip.
  double dmax = 0.0;
  for (const auto& v : tri) dmax = std::max(dmax, (v - geom.tip).norm());
  double dmin = 0.0;
  if (!point_in_triangle(geom.tip, tri[0], tri[1], tri[2], 0.0)) {
    dmin = 1e300;
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = tri[k];
      const Vec2& b = tri[(k + 1) % 3];
      const Vec2 e = b - a;
      const double t = std::clamp((geom.tip - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
      dmin = std::min(dmin, (geom.tip - a - t * e).norm());
    }
  }

  bool near_enrichment = false;
  if (config.method == Method::classic_xfem) near_enrichment = dmin <= config.r_s;
  if (config.method == Method::cut_xfem)
    near_enrichment = dmin <= config.cutoff.r1 && dmax >= config.cutoff.r0;
  return standard_rule(tri, near_enrichment ? 6 + up : 4 + up);
}

QuadratureRule segment_rule(const Vec2& a, const Vec2& b, int n_points) {
  // Gauss-Legendre nodes on [-1,1].
  static const double x6[] = {-0.932469514203152, -0.661209386466265, -0.238619186083197,
                              0.238619186083197,  0.661209386466265,  0.932469514203152};
  static const double w6[] = {0.171324492379170, 0.360761573048139, 0.467913934572691,
                              0.467913934572691, 0.360761573048139, 0.171324492379170};
  static const double x3[] = {-0.774596669241483, 0.0, 0.774596669241483};
  static const double w3[] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double* xs = n_points <= 3 ? x3 : x6;
  const double* ws = n_points <= 3 ? w3 : w6;
  const int n = n_points <= 3 ? 3 : 6;

  QuadratureRule rule;
  const double half_len = 0.5 * (b - a).norm();
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (1.0 + xs[i]);
    rule.points.push_back(a + t * (b - a));
    rule.weights.push_back(ws[i] * half_len);
  }
  return rule;
}

QuadratureRule graded_segment_rule(const Vec2& a, const Vec2& b, const CornerGeometry& geom,
                                   int n_points) {
  const bool a_at_tip = (a - geom.tip).norm() < kGeomTol;
  const bool b_at_tip = (b - geom.tip).norm() < kGeomTol;
  if (!a_at_tip && !b_at_tip) return segment_rule(a, b, n_points);

  const Vec2 tip_end = a_at_tip ? a : b;
  const Vec2 far_end = a_at_tip ? b : a;
  // The truncated core carries ~sqrt of its length for r^(-1/2) integrands,
  // so the geometric splitting has to run deep.
  QuadratureRule rule;
  double s_outer = 1.0;
  for (int k = 0; k < 68; ++k) {
    const double s_inner = 0.5 * s_outer;
    rule.append(segment_rule(tip_end + s_inner * (far_end - tip_end),
                             tip_end + s_outer * (far_end - tip_end), n_points));
    s_outer = s_inner;
  }
  return rule;
}

}  // namespace xfemopt
