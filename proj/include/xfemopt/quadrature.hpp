#ifndef XFEMOPT_QUADRATURE_HPP
#define XFEMOPT_QUADRATURE_HPP

#include <array>
#include <vector>

#include "xfemopt/enrichment.hpp"
#include "xfemopt/mesh.hpp"

namespace xfemopt {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Physical-space quadrature points and weights; for rules covering a whole
/// element the weights sum to the element area.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
  double weight_sum() const;
  void append(const QuadratureRule& other);
};

using TrianglePoints = std::array<Vec2, 3>;

/// Symmetric positive-weight rule exact for bivariate polynomials up to
/// `degree` (1..10) on the triangle.
QuadratureRule standard_rule(const TrianglePoints& tri, int degree);

/// Rule for elements crossed by the crack: the element is split along the
/// crack line, each piece fan-triangulated and given standard rules. No
/// point lands on the crack, so side assignment is unambiguous. Pieces that
/// contain the tip on their closure are graded toward it.
QuadratureRule cut_element_rule(const TrianglePoints& tri, const CornerGeometry& geom, int degree);

/// Rule for elements containing the tip: `levels` declared geometric layers
/// (contraction 1/2) per fan triangle around the tip, continued by a fixed
/// shrinking tail onto the tip so gradient-singular integrands r^(2*beta-2)
/// integrate to ~1e-8 relative at levels = 12, degree = 6.
QuadratureRule tip_graded_rule(const TrianglePoints& tri, const CornerGeometry& geom, int levels,
                               int degree);

enum class RulePurpose { assembly, error_norm };

bool is_tip_element(const TrianglePoints& tri, const CornerGeometry& geom);
bool is_cut_element(const TrianglePoints& tri, const CornerGeometry& geom);

/// Per-element dispatch: tip elements get graded rules, crack-cut elements
/// split rules, elements near the enrichment zone a degree-6 rule and the far
/// field degree 4. error_norm upgrades all degrees by 2.
QuadratureRule select_rule(const Mesh& mesh, int element, const CornerGeometry& geom,
                           const EnrichmentConfig& config, RulePurpose purpose);

/// 1D Gauss rule on the segment [a,b]; weights carry the length measure.
QuadratureRule segment_rule(const Vec2& a, const Vec2& b, int n_points);

/// As segment_rule, but split geometrically toward an endpoint that coincides
/// with the corner tip (integrands there behave like r^(beta-1)).
QuadratureRule graded_segment_rule(const Vec2& a, const Vec2& b, const CornerGeometry& geom,
                                   int n_points);

}  // namespace xfemopt

#endif
