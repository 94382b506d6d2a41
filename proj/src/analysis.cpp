#include "xfemopt/analysis.hpp"

#include <cmath>

namespace xfemopt {

std::optional<BenchmarkCase> benchmark_case_from_string(const std::string& name) {
  if (name == "example1") return BenchmarkCase::example1;
  if (name == "example2") return BenchmarkCase::example2;
  if (name == "example3") return BenchmarkCase::example3;
  if (name == "example3alt") return BenchmarkCase::example3alt;
  return std::nullopt;
}

std::string to_string(BenchmarkCase c) {
  switch (c) {
    case BenchmarkCase::example1: return "example1";
    case BenchmarkCase::example2: return "example2";
    case BenchmarkCase::example3: return "example3";
    case BenchmarkCase::example3alt: return "example3alt";
  }
  return "example1";
}

namespace {

// sqrt(r) sin(theta/2) around the crack tip with its Cartesian gradient;
// harmonic away from the tip.
struct CrackSingular {
  double value;
  Vec2 grad;
};

CrackSingular crack_singular(const Vec2& x, const CornerGeometry& geom) {
  const PolarCoords pc = polar_coords(x, geom);
  if (pc.at_tip) return {0.0, Vec2::Zero()};
  const SingularEval s = singular_eval(0.5, pc.r, pc.theta, geom);
  return {s.value, s.gradient};
}

Benchmark crack_square_benchmark(bool constrained) {
  Benchmark bench;
  bench.which = constrained ? BenchmarkCase::example2 : BenchmarkCase::example1;
  bench.geom = crack_square_geometry();
  bench.crack_domain = true;
  bench.alpha = constrained ? 1.0 : 0.01;
  bench.reaction = 0.0;
  if (constrained) {
    bench.bounds.lower = [](const Vec2&) { return -0.2; };
    bench.bounds.upper = [](const Vec2&) { return 0.2; };
  }

  const CornerGeometry geom = bench.geom;
  const double alpha = bench.alpha;
  const bool box = constrained;

  auto p_value = [geom](const Vec2& x) {
    const auto s = crack_singular(x, geom);
    const double gx = 1.0 - x.x() * x.x(), gy = 1.0 - x.y() * x.y();
    return x.y() * x.y() * gy * gx + 0.5 * s.value * gx * gy;
  };
  auto p_grad = [geom](const Vec2& x) {
    const auto s = crack_singular(x, geom);
    const double x1 = x.x(), x2 = x.y();
    const double gx = 1.0 - x1 * x1, gy = 1.0 - x2 * x2;
    // grad of x2^2 (1-x2^2)(1-x1^2)
    Vec2 g(-2.0 * x1 * x2 * x2 * gy, (2.0 * x2 - 4.0 * x2 * x2 * x2) * gx);
    // grad of 1/2 s (1-x1^2)(1-x2^2)
    g += 0.5 * (gx * gy * s.grad + s.value * Vec2(-2.0 * x1 * gy, -2.0 * x2 * gx));
    return g;
  };
  auto lap_p = [geom](const Vec2& x) {
    const auto s = crack_singular(x, geom);
    const double x1 = x.x(), x2 = x.y();
    const double gx = 1.0 - x1 * x1, gy = 1.0 - x2 * x2;
    // lap(x2^2 gy gx), with lap(s) = 0 used for the singular product
    const double lap_q = -2.0 * x2 * x2 * gy + (2.0 - 12.0 * x2 * x2) * gx;
    const Vec2 grad_g(-2.0 * x1 * gy, -2.0 * x2 * gx);
    const double lap_g = -2.0 * gy - 2.0 * gx;
    return lap_q + 0.5 * s.value * lap_g + s.grad.dot(grad_g);
  };
  auto u_value = [p_value, alpha, box](const Vec2& x) {
    const double t = -p_value(x) / alpha;
    return box ? std::min(0.2, std::max(-0.2, t)) : t;
  };

  bench.exact.y.value = [geom](const Vec2& x) {
    return crack_singular(x, geom).value - 0.25 * x.squaredNorm();
  };
  bench.exact.y.gradient = [geom](const Vec2& x) {
    return Vec2(crack_singular(x, geom).grad - 0.5 * x);
  };
  bench.exact.p.value = p_value;
  bench.exact.p.gradient = p_grad;
  bench.exact.u = u_value;
  // -lap(y) = 1, so f = 1 - u;  y_d = y + lap(p).
  bench.exact.f = [u_value](const Vec2& x) { return 1.0 - u_value(x); };
  bench.exact.y_d = [geom, lap_p](const Vec2& x) {
    return crack_singular(x, geom).value - 0.25 * x.squaredNorm() + lap_p(x);
  };
  bench.exact.y_b = bench.exact.y.value;
  return bench;
}

// (r^a - r^b) sin(lambda theta) solutions on the three-quarter disk with
// -lap + id as the operator; lambda = 2/3 makes the angular factor vanish on
// both straight edges.
Benchmark disk_benchmark(bool printed_exponents) {
  Benchmark bench;
  bench.which = printed_exponents ? BenchmarkCase::example3 : BenchmarkCase::example3alt;
  bench.geom = three_quarter_disk_geometry();
  bench.crack_domain = false;
  bench.alpha = 0.01;
  bench.reaction = 1.0;
  bench.bounds.lower = [](const Vec2&) { return -0.3; };
  bench.bounds.upper = [](const Vec2&) { return 1.0; };

  const CornerGeometry geom = bench.geom;
  const double lambda = 2.0 / 3.0;
  const double a = printed_exponents ? 1.5 : 2.0 / 3.0;
  const double b = printed_exponents ? 2.5 : 5.0 / 3.0;
  const double alpha = bench.alpha;

  auto y_value = [geom, lambda, a, b](const Vec2& x) {
    const PolarCoords pc = polar_coords(x, geom);
    if (pc.at_tip) return 0.0;
    return (std::pow(pc.r, a) - std::pow(pc.r, b)) * std::sin(lambda * pc.theta);
  };
  auto y_grad = [geom, lambda, a, b](const Vec2& x) {
    const PolarCoords pc = polar_coords(x, geom);
    if (pc.at_tip) return Vec2(Vec2::Zero());
    const double ra1 = std::pow(pc.r, a - 1.0), rb1 = std::pow(pc.r, b - 1.0);
    const double phi = geom.edge_angle_start + geom.sweep * pc.theta;
    const Vec2 e_r(std::cos(phi), std::sin(phi));
    const Vec2 e_t = geom.sweep * Vec2(-std::sin(phi), std::cos(phi));
    return Vec2((a * ra1 - b * rb1) * std::sin(lambda * pc.theta) * e_r +
                (ra1 - rb1) * lambda * std::cos(lambda * pc.theta) * e_t);
  };
  auto lap_y = [geom, lambda, a, b](const Vec2& x) {
    const PolarCoords pc = polar_coords(x, geom);
    if (pc.at_tip) return 0.0;
    const double ca = a * a - lambda * lambda, cb = b * b - lambda * lambda;
    return (ca * std::pow(pc.r, a - 2.0) - cb * std::pow(pc.r, b - 2.0)) *
           std::sin(lambda * pc.theta);
  };
  auto u_value = [y_value](const Vec2& x) {
    return std::min(1.0, std::max(-0.3, -y_value(x)));  // -p/alpha = -y
  };

  bench.exact.y.value = y_value;
  bench.exact.y.gradient = y_grad;
  bench.exact.p.value = [y_value, alpha](const Vec2& x) { return alpha * y_value(x); };
  bench.exact.p.gradient = [y_grad, alpha](const Vec2& x) { return Vec2(alpha * y_grad(x)); };
  bench.exact.u = u_value;
  // -lap(y) + y = u + f  and  -lap(p) + p = y - y_d with p = alpha y.
  bench.exact.f = [y_value, lap_y, u_value](const Vec2& x) {
    return -lap_y(x) + y_value(x) - u_value(x);
  };
  bench.exact.y_d = [y_value, lap_y, alpha](const Vec2& x) {
    return y_value(x) + alpha * (lap_y(x) - y_value(x));
  };
  bench.exact.y_b = [](const Vec2&) { return 0.0; };
  return bench;
}

}  // namespace

Benchmark builtin_benchmark(BenchmarkCase c) {
  switch (c) {
    case BenchmarkCase::example1: return crack_square_benchmark(false);
    case BenchmarkCase::example2: return crack_square_benchmark(true);
    case BenchmarkCase::example3: return disk_benchmark(true);
    case BenchmarkCase::example3alt: return disk_benchmark(false);
  }
  throw std::logic_error("unknown benchmark case");
}

ErrorNorms error_norms(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                       const EnrichmentConfig& config, const Vector& Y, const Vector& P,
                       double alpha, const BoundsField& bounds, const ExactTriple& exact,
                       const AssemblyOptions& options) {
  ErrorNorms n;
  double e_y_h1 = 0, e_y_l2 = 0, e_p_h1 = 0, e_p_l2 = 0, e_u_l2 = 0;
  double n_y_h1 = 0, n_y_l2 = 0, n_p_h1 = 0, n_p_l2 = 0, n_u_l2 = 0;

  AssemblyOptions err_options = options;
  if (err_options.degree_override) *err_options.degree_override += 2;
  const QuadCache cache =
      build_quad_cache(mesh, dofmap, geom, config, RulePurpose::error_norm, err_options);

  for (const auto& blk : cache.blocks) {
    const int k = blk.entry_end - blk.entry_begin;
    for (int q = blk.q_begin; q < blk.q_end; ++q) {
      const Vec2& x = cache.points[q];
      const double w = cache.weights[q];
      const long row = blk.val_begin + static_cast<long>(q - blk.q_begin) * k;
      double yh = 0, ph = 0;
      Vec2 gyh = Vec2::Zero(), gph = Vec2::Zero();
      for (int j = 0; j < k; ++j) {
        const int entry = cache.entries[blk.entry_begin + j];
        const double v = cache.values[row + j];
        const Vec2 g(cache.grad_x[row + j], cache.grad_y[row + j]);
        yh += Y[entry] * v;
        ph += P[entry] * v;
        gyh += Y[entry] * g;
        gph += P[entry] * g;
      }
      const double ye = exact.y.value(x), pe = exact.p.value(x), ue = exact.u(x);
      const Vec2 gye = exact.y.gradient(x), gpe = exact.p.gradient(x);
      const double uh = clamp_control(ph, alpha, bounds.lower_at(x), bounds.upper_at(x));

      e_y_l2 += w * (ye - yh) * (ye - yh);
      e_p_l2 += w * (pe - ph) * (pe - ph);
      e_u_l2 += w * (ue - uh) * (ue - uh);
      e_y_h1 += w * (gye - gyh).squaredNorm();
      e_p_h1 += w * (gpe - gph).squaredNorm();
      n_y_l2 += w * ye * ye;
      n_p_l2 += w * pe * pe;
      n_u_l2 += w * ue * ue;
      n_y_h1 += w * gye.squaredNorm();
      n_p_h1 += w * gpe.squaredNorm();
    }
  }

  n.y_h1 = std::sqrt(e_y_h1);
  n.y_l2 = std::sqrt(e_y_l2);
  n.p_h1 = std::sqrt(e_p_h1);
  n.p_l2 = std::sqrt(e_p_l2);
  n.u_l2 = std::sqrt(e_u_l2);
  n.ny_h1 = std::sqrt(n_y_h1);
  n.ny_l2 = std::sqrt(n_y_l2);
  n.np_h1 = std::sqrt(n_p_h1);
  n.np_l2 = std::sqrt(n_p_l2);
  n.nu_l2 = std::sqrt(n_u_l2);
  return n;
}

std::optional<double> estimate_order(double e_coarse, double e_fine, double h_coarse,
                                     double h_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !(h_coarse > 0.0) || !(h_fine > 0.0) ||
      h_coarse == h_fine)
    return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

}  // namespace xfemopt
