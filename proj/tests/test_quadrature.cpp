#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "xfemopt/geometry.hpp"
#include "xfemopt/quadrature.hpp"

using namespace xfemopt;

namespace {

double apply(const QuadratureRule& rule, const std::function<double(const Vec2&)>& f) {
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(rule.points[q]);
  return s;
}

// Exact integral of x^a y^b over the unit right triangle (0,0),(1,0),(0,1):
// a! b! / (a+b+2)!.
double monomial_exact(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int depth = 0) {
  const double m = 0.5 * (a + b);
  auto simpson = [&](double lo, double hi) {
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
  };
  const double whole = simpson(a, b);
  const double halves = simpson(a, m) + simpson(m, b);
  if (depth > 40 || std::abs(halves - whole) < 15.0 * tol) return halves;
  return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, 0.5 * tol, depth + 1);
}

const TrianglePoints kUnitRight{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};

// Radial-reduction oracle for int r^alpha over the unit right triangle with
// the singularity at the origin vertex: int_theta rho^(alpha+2)/(alpha+2).
double radial_power_oracle(double alpha) {
  return adaptive_simpson(
      [&](double theta) {
        const double rho = 1.0 / (std::cos(theta) + std::sin(theta));
        return std::pow(rho, alpha + 2.0) / (alpha + 2.0);
      },
      0.0, M_PI / 2, 1e-13);
}

}  // namespace

TEST_CASE("standard rules") {
  SUBCASE("degree 1 is the centroid rule") {
    const QuadratureRule r = standard_rule(kUnitRight, 1);
    REQUIRE(r.size() == 1);
    CHECK(r.points[0].isApprox(Vec2(1.0 / 3, 1.0 / 3)));
    CHECK(r.weights[0] == doctest::Approx(0.5));
  }
  SUBCASE("int x^2 y via the degree-3 rule") {
    CHECK(apply(standard_rule(kUnitRight, 3),
                [](const Vec2& p) { return p.x() * p.x() * p.y(); }) ==
          doctest::Approx(1.0 / 60).epsilon(1e-13));
    CHECK(monomial_exact(2, 1) == doctest::Approx(1.0 / 60));
  }
  SUBCASE("declared polynomial exactness, positivity") {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (int degree = 1; degree <= 10; ++degree) {
      const QuadratureRule r = standard_rule(kUnitRight, degree);
      for (double w : r.weights) CHECK(w > 0.0);
      for (int rep = 0; rep < 5; ++rep) {
        double exact = 0.0;
        std::vector<std::array<double, 3>> terms;  // coeff, a, b
        for (int a = 0; a <= degree; ++a)
          for (int b = 0; a + b <= degree; ++b) {
            const double c = coeff(gen);
            terms.push_back({c, double(a), double(b)});
            exact += c * monomial_exact(a, b);
          }
        const double got = apply(r, [&](const Vec2& p) {
          double s = 0.0;
          for (const auto& t : terms) s += t[0] * std::pow(p.x(), t[1]) * std::pow(p.y(), t[2]);
          return s;
        });
        CHECK(got == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
  SUBCASE("weights sum to the area for random triangles") {
    std::mt19937 gen(23);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
      const TrianglePoints tri{Vec2(u(gen), u(gen)), Vec2(u(gen), u(gen)), Vec2(u(gen), u(gen))};
      const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
      if (area < 1e-6) continue;
      const QuadratureRule r = standard_rule(tri, 4);
      CHECK(r.weight_sum() == doctest::Approx(area).epsilon(1e-12));
    }
  }
  SUBCASE("unsupported degree") {
    CHECK_THROWS_AS(standard_rule(kUnitRight, 0), QuadratureError);
    CHECK_THROWS_AS(standard_rule(kUnitRight, 11), QuadratureError);
  }
}

TEST_CASE("cut element rules") {
  const CornerGeometry g = crack_square_geometry();
  // Element straddling the crack, away from the tip.
  const TrianglePoints tri{Vec2(-0.6, -0.1), Vec2(-0.4, -0.1), Vec2(-0.5, 0.15)};
  REQUIRE(is_cut_element(tri, g));
  const QuadratureRule r = cut_element_rule(tri, g, 6);
  const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));

  SUBCASE("weights sum to the area; no point near the crack") {
    CHECK(r.weight_sum() == doctest::Approx(area).epsilon(1e-12));
    for (const auto& p : r.points) CHECK(std::abs(p.y()) > 1e-14);
  }
  SUBCASE("side weights reproduce the clipped areas") {
    const Polygon whole{tri[0], tri[1], tri[2]};
    const double area_up = std::abs(polygon_area(clip_half_plane(whole, g.tip, Vec2(0, 1), 1.0)));
    double up = 0.0;
    for (int q = 0; q < r.size(); ++q)
      if (r.points[q].y() > 0) up += r.weights[q];
    CHECK(up == doctest::Approx(area_up).epsilon(1e-12));
  }
  SUBCASE("bisecting cut splits weights evenly and H integrates to zero") {
    const TrianglePoints symm{Vec2(-0.6, -0.1), Vec2(-0.3, 0.0), Vec2(-0.6, 0.1)};
    REQUIRE(is_cut_element(symm, g));
    const QuadratureRule rs = cut_element_rule(symm, g, 6);
    double up = 0, down = 0;
    for (int q = 0; q < rs.size(); ++q) (rs.points[q].y() > 0 ? up : down) += rs.weights[q];
    CHECK(up == doctest::Approx(down).epsilon(1e-12));
    const double hint = apply(rs, [&](const Vec2& p) { return double(heaviside(p, g)); });
    CHECK(std::abs(hint) < 1e-12);
  }
  SUBCASE("hat x heaviside product matches the exact clipped-centroid oracle") {
    // The integrand is linear on each clipped polygon, so the exact value is
    // area * value(centroid), piece by piece.
    const Vec2 a = tri[0], b = tri[1], c = tri[2];
    const double inv2a = 1.0 / (2.0 * signed_area(a, b, c));
    auto hat = [&](const Vec2& p) { return 2.0 * signed_area(p, b, c) * inv2a; };
    const Polygon whole{a, b, c};
    double exact = 0.0;
    for (double side : {1.0, -1.0}) {
      const Polygon piece = clip_half_plane(whole, g.tip, Vec2(0, 1), side);
      if (piece.size() < 3) continue;
      Vec2 centroid = Vec2::Zero();
      double A = 0.0;
      for (size_t i = 0; i < piece.size(); ++i) {
        const Vec2& p = piece[i];
        const Vec2& q = piece[(i + 1) % piece.size()];
        const double cross = p.x() * q.y() - q.x() * p.y();
        A += 0.5 * cross;
        centroid += cross / 6.0 * (p + q);
      }
      centroid /= A;
      exact += side * std::abs(A) * hat(centroid);
    }
    const double got = apply(r, [&](const Vec2& p) { return hat(p) * heaviside(p, g); });
    CHECK(got == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("tip graded rules") {
  const CornerGeometry g = crack_square_geometry();

  SUBCASE("r^(-1/2): radial oracle at 1e-8 relative") {
    const QuadratureRule r = tip_graded_rule(kUnitRight, g, 12, 6);
    const double oracle = radial_power_oracle(-0.5);
    const double got = apply(r, [](const Vec2& p) { return 1.0 / std::sqrt(p.norm()); });
    CHECK(std::abs(got - oracle) <= 1e-8 * std::abs(oracle));
  }
  SUBCASE("grad S_(1/2) squared: (1/4) r^(-1) to 1e-6 relative") {
    const QuadratureRule r = tip_graded_rule(kUnitRight, g, 12, 6);
    const double oracle = 0.25 * radial_power_oracle(-1.0);
    const double got = apply(r, [&](const Vec2& p) {
      const PolarCoords pc = polar_coords(p, g);
      return singular_eval(0.5, pc.r, pc.theta, g).gradient.squaredNorm();
    });
    CHECK(std::abs(got - oracle) <= 1e-6 * std::abs(oracle));
  }
  SUBCASE("tip on an edge") {
    const TrianglePoints tri{Vec2(-1, 0), Vec2(1, 0), Vec2(0, 1)};
    const CornerGeometry disk = three_quarter_disk_geometry();  // tip at origin, no crack
    const QuadratureRule r = tip_graded_rule(tri, disk, 12, 6);
    CHECK(r.weight_sum() == doctest::Approx(1.0).epsilon(1e-10));
    const double oracle = 2.0 * radial_power_oracle(-0.5);  // two mirror halves
    const double got = apply(r, [](const Vec2& p) { return 1.0 / std::sqrt(p.norm()); });
    CHECK(std::abs(got - oracle) <= 1e-8 * std::abs(oracle));
  }
  SUBCASE("smooth integrands agree with the standard rule") {
    const QuadratureRule graded = tip_graded_rule(kUnitRight, g, 12, 6);
    const QuadratureRule plain = standard_rule(kUnitRight, 6);
    auto poly = [](const Vec2& p) {
      return 1.0 + p.x() - 2.0 * p.y() + p.x() * p.y() * p.y() + std::pow(p.x(), 5);
    };
    CHECK(apply(graded, poly) == doctest::Approx(apply(plain, poly)).epsilon(1e-10));
  }
  SUBCASE("doubling levels is a 1e-8-stable refinement") {
    auto energy = [&](int levels) {
      const QuadratureRule r = tip_graded_rule(kUnitRight, g, levels, 6);
      return apply(r, [&](const Vec2& p) {
        const PolarCoords pc = polar_coords(p, g);
        return singular_eval(0.5, pc.r, pc.theta, g).gradient.squaredNorm();
      });
    };
    const double e12 = energy(12), e24 = energy(24);
    CHECK(std::abs(e24 - e12) <= 1e-8 * std::abs(e12));
  }
  SUBCASE("positivity and area") {
    const QuadratureRule r = tip_graded_rule(kUnitRight, g, 12, 6);
    for (double w : r.weights) CHECK(w > 0.0);
    CHECK(r.weight_sum() == doctest::Approx(0.5).epsilon(1e-10));
    for (const auto& p : r.points) CHECK(p.norm() > 0.0);
  }
}

TEST_CASE("rule dispatch") {
  const CornerGeometry g = crack_square_geometry();
  EnrichmentConfig cut;
  cut.method = Method::cut_xfem;
  cut.cutoff = {0.01, 0.99};
  const Mesh mesh = build_structured_crack_mesh(39, false);

  int n_tip = 0, n_cut = 0, n_deg6 = 0, n_deg4 = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TrianglePoints tri = mesh.triangle_points(t);
    const QuadratureRule r = select_rule(mesh, t, g, cut, RulePurpose::assembly);
    if (is_tip_element(tri, g) && !is_cut_element(tri, g)) {
      ++n_tip;
      CHECK(r.size() > 100);  // graded
    } else if (is_cut_element(tri, g)) {
      ++n_cut;
      double up = 0, down = 0;
      for (int q = 0; q < r.size(); ++q) (r.points[q].y() > 0 ? up : down) += r.weights[q];
      CHECK(up > 0.0);
      CHECK(down > 0.0);
    } else if (r.size() == 12) {
      ++n_deg6;
    } else if (r.size() == 6) {
      ++n_deg4;
    }
    CHECK(r.weight_sum() == doctest::Approx(mesh.triangle_area(t)).epsilon(1e-9));
  }
  CHECK(n_tip >= 1);   // the un-cut central tip element
  CHECK(n_cut >= 39);  // one row of cut squares
  CHECK(n_deg6 > 0);   // transition annulus
  CHECK(n_deg4 > 0);   // far field beyond r1
  // error_norm purpose upgrades the far field to degree 6 (12 points)
  int far_elem = -1;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.triangle_points(t);
    if (((p[0] + p[1] + p[2]) / 3.0).norm() > 1.35) far_elem = t;
  }
  REQUIRE(far_elem >= 0);
  CHECK(select_rule(mesh, far_elem, g, cut, RulePurpose::assembly).size() == 6);
  CHECK(select_rule(mesh, far_elem, g, cut, RulePurpose::error_norm).size() == 12);
}

TEST_CASE("segment rules") {
  const Vec2 a(0.2, -0.3), b(1.4, 0.9);
  const QuadratureRule r = segment_rule(a, b, 6);
  const double len = (b - a).norm();
  CHECK(r.weight_sum() == doctest::Approx(len).epsilon(1e-13));
  // Gauss-6 integrates t^9 exactly along the segment.
  double got = 0.0;
  for (int q = 0; q < r.size(); ++q) {
    const double t = (r.points[q] - a).norm() / len;
    got += r.weights[q] * std::pow(t, 9);
  }
  CHECK(got == doctest::Approx(len / 10.0).epsilon(1e-12));

  SUBCASE("graded toward the tip handles r^(beta-1)") {
    const CornerGeometry g = crack_square_geometry();
    const Vec2 tip(0, 0), far(-0.7, 0);
    const QuadratureRule gr = graded_segment_rule(tip, far, g, 6);
    double v = 0.0;
    for (int q = 0; q < gr.size(); ++q) v += gr.weights[q] / std::sqrt(gr.points[q].norm());
    CHECK(v == doctest::Approx(2.0 * std::sqrt(0.7)).epsilon(1e-9));
  }
}
