#ifndef XFEMOPT_ANALYSIS_HPP
#define XFEMOPT_ANALYSIS_HPP

#include <optional>
#include <string>

#include "xfemopt/assembly.hpp"
#include "xfemopt/control.hpp"

namespace xfemopt {

struct ExactField {
  Field value;
  std::function<Vec2(const Vec2&)> gradient;
};

/// Manufactured optimality triple (y, p, u) with the data fields it induces.
struct ExactTriple {
  ExactField y, p;
  Field u;
  Field f, y_d, y_b;
};

enum class BenchmarkCase { example1, example2, example3, example3alt };

std::optional<BenchmarkCase> benchmark_case_from_string(const std::string& name);
std::string to_string(BenchmarkCase c);

/// A benchmark bundles the corner geometry, PDE data and the exact triple;
/// the discretization (method, radii) is chosen by the caller.
struct Benchmark {
  BenchmarkCase which;
  CornerGeometry geom;
  double alpha = 1.0;
  double reaction = 0.0;
  BoundsField bounds;
  ExactTriple exact;
  bool crack_domain = false;  // crack square vs three-quarter disk

  ControlProblem problem(const EnrichmentConfig& config) const {
    ControlProblem p;
    p.geom = geom;
    p.config = config;
    p.reaction = reaction;
    p.f = exact.f;
    p.y_d = exact.y_d;
    p.alpha = alpha;
    p.bounds = bounds;
    p.y_b = exact.y_b;
    return p;
  }
};

Benchmark builtin_benchmark(BenchmarkCase c);

/// Relative errors in the table normalization: each error divided by the
/// same norm of the exact solution computed with the same quadrature.
struct ErrorNorms {
  double y_h1 = 0, y_l2 = 0, p_h1 = 0, p_l2 = 0, u_l2 = 0;        // absolute
  double ny_h1 = 0, ny_l2 = 0, np_h1 = 0, np_l2 = 0, nu_l2 = 0;   // exact norms

  double rel_y_h1() const { return y_h1 / ny_h1; }
  double rel_y_l2() const { return y_l2 / ny_l2; }
  double rel_p_h1() const { return p_h1 / np_h1; }
  double rel_p_l2() const { return p_l2 / np_l2; }
  double rel_u_l2() const { return u_l2 / nu_l2; }
};

/// H1-seminorm and L2 errors of state and costate plus the L2 control error;
/// u_h is evaluated through the clamp of the discrete costate (variational
/// discretization), never through control dofs.
ErrorNorms error_norms(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                       const EnrichmentConfig& config, const Vector& Y, const Vector& P,
                       double alpha, const BoundsField& bounds, const ExactTriple& exact,
                       const AssemblyOptions& options = {});

/// log(e_coarse/e_fine) / log(h_coarse/h_fine); absent when either error is
/// not positive.
std::optional<double> estimate_order(double e_coarse, double e_fine, double h_coarse,
                                     double h_fine);

}  // namespace xfemopt

#endif
