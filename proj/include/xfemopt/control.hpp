#ifndef XFEMOPT_CONTROL_HPP
#define XFEMOPT_CONTROL_HPP

#include <span>
#include <string>
#include <vector>

#include "xfemopt/assembly.hpp"

namespace xfemopt {

struct ControlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// min{u1, max{u0, -p/alpha}} with possibly infinite bounds.
inline double clamp_control(double p_value, double alpha, double u0, double u1) {
  return std::min(u1, std::max(u0, -p_value / alpha));
}

/// The variationally discretized control: never carries its own dofs, only
/// the clamped scaled costate evaluated pointwise.
struct ControlEvaluator {
  double alpha = 1.0;
  const BoundsField* bounds = nullptr;

  double operator()(const Vec2& x, double p_value) const {
    return clamp_control(p_value, alpha, bounds->lower_at(x), bounds->upper_at(x));
  }
};

struct Solution {
  Vector Y, P;                    // full dof vectors (constrained entries included)
  std::vector<PointLabel> labels; // per assembly quadrature point
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
  std::vector<std::string> warnings;

  int count(PointLabel l) const {
    int n = 0;
    for (auto v : labels) n += v == l;
    return n;
  }
};

/// State solve A Y = load(u + f) + boundary terms for a fixed control given
/// at the assembly quadrature points.
Vector solve_state(const AssembledSystem& sys, std::span<const double> u_at_q);
Vector solve_state(const AssembledSystem& sys, const Field& control);

/// Costate solve A P = M Y - F2 with homogeneous Dirichlet data.
Vector solve_costate(const AssembledSystem& sys, const Vector& Y);

/// p_h at every assembly quadrature point.
std::vector<double> costate_at_points(const AssembledSystem& sys, const Vector& P);

/// J_h(y_h, u_h) by the assembly quadrature.
double objective_value(const AssembledSystem& sys, const Vector& Y,
                       std::span<const double> u_at_q);

/// Primal-dual active set (semi-smooth Newton) iteration on the
/// quadrature-point labels. Each sweep solves the coupled KKT system
///   A Y + (1/alpha) M_I P = b_active + F1 + bc,   -M Y + A P = -F2 + bc
/// at the current labels (M_I the inactive-indicator mass) and relabels from
/// the new costate. Terminates on label-set equality.
Solution ssn_solve(AssembledSystem& sys, int max_iterations = 50);
Solution ssn_solve(const Mesh& mesh, const ControlProblem& problem,
                   const AssemblyOptions& options = {}, int max_iterations = 50);

}  // namespace xfemopt

#endif
