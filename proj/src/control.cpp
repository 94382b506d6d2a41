#include "xfemopt/control.hpp"

#include <cmath>
#include <map>

namespace xfemopt {

namespace {

Vector state_rhs_free(const AssembledSystem& sys, const Vector& extra_full) {
  Vector rhs = sys.F1 + sys.nitsche_rhs + extra_full - sys.A * sys.dirichlet;
  return sys.restrict_free(rhs);
}

}  // namespace

Vector solve_state(const AssembledSystem& sys, std::span<const double> u_at_q) {
  const Vector Fu = assemble_load(sys.cache, sys.dofmap, u_at_q);
  const Vector yf =
      sparse_solve(sys.A_ff, state_rhs_free(sys, Fu), /*symmetric_positive=*/true, nullptr);
  return sys.extend_free(yf, sys.dirichlet);
}

Vector solve_state(const AssembledSystem& sys, const Field& control) {
  std::vector<double> u(sys.cache.num_points());
  for (int q = 0; q < sys.cache.num_points(); ++q) u[q] = control(sys.cache.points[q]);
  return solve_state(sys, u);
}

Vector solve_costate(const AssembledSystem& sys, const Vector& Y) {
  const Vector rhs = sys.restrict_free(sys.M * Y - sys.F2);
  const Vector pf = sparse_solve(sys.A_ff, rhs, /*symmetric_positive=*/true, nullptr);
  return sys.extend_free(pf, Vector::Zero(sys.dofmap.size()));
}

std::vector<double> costate_at_points(const AssembledSystem& sys, const Vector& P) {
  std::vector<double> out(sys.cache.num_points());
  for (const auto& b : sys.cache.blocks)
    for (int q = b.q_begin; q < b.q_end; ++q) out[q] = sys.cache.eval(b, q, P);
  return out;
}

double objective_value(const AssembledSystem& sys, const Vector& Y,
                       std::span<const double> u_at_q) {
  double j_track = 0.0, j_ctrl = 0.0;
  for (const auto& b : sys.cache.blocks) {
    for (int q = b.q_begin; q < b.q_end; ++q) {
      const double y = sys.cache.eval(b, q, Y);
      const double dy = y - sys.yd_at_q[q];
      j_track += sys.cache.weights[q] * dy * dy;
      j_ctrl += sys.cache.weights[q] * u_at_q[q] * u_at_q[q];
    }
  }
  return 0.5 * j_track + 0.5 * sys.alpha * j_ctrl;
}

Solution ssn_solve(AssembledSystem& sys, int max_iterations) {
  const int F = sys.dofmap.num_free();
  const int nq = sys.cache.num_points();
  Solution sol;
  sol.labels.assign(nq, PointLabel::inactive);

  const Vector rhs_costate_base = sys.restrict_free(sys.M * sys.dirichlet - sys.F2);
  const Vector rhs_state_base = state_rhs_free(sys, Vector::Zero(sys.dofmap.size()));

  // Static part of the coupled matrix: [A_ff, . ; -M_ff, A_ff].
  std::vector<Eigen::Triplet<double>> static_trips;
  static_trips.reserve(2 * sys.A_ff.nonZeros() + sys.M_ff.nonZeros());
  for (int k = 0; k < sys.A_ff.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.A_ff, k); it; ++it) {
      static_trips.emplace_back(it.row(), it.col(), it.value());
      static_trips.emplace_back(F + it.row(), F + it.col(), it.value());
    }
  for (int k = 0; k < sys.M_ff.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.M_ff, k); it; ++it)
      static_trips.emplace_back(F + it.row(), it.col(), -it.value());

  std::vector<double> u_prev;
  std::map<size_t, int> seen_label_sets;
  auto label_hash = [&]() {
    return std::hash<std::string_view>{}(std::string_view(
        reinterpret_cast<const char*>(sol.labels.data()), sol.labels.size()));
  };

  for (int iter = 1; iter <= max_iterations; ++iter) {
    sol.iterations = iter;

    const SpMat M_inactive = assemble_indicator_mass(
        sys.cache, sys.dofmap,
        [&](int q, const Vec2&) { return sol.labels[q] == PointLabel::inactive; });
    const SpMat Mi_ff = restrict_free_free(M_inactive, sys.dofmap);
    const Vector b_active = assemble_active_load(sys.cache, sys.dofmap, sys.bounds, sol.labels);

    std::vector<Eigen::Triplet<double>> trips = static_trips;
    const double inv_alpha = 1.0 / sys.alpha;
    for (int k = 0; k < Mi_ff.outerSize(); ++k)
      for (SpMat::InnerIterator it(Mi_ff, k); it; ++it)
        trips.emplace_back(it.row(), F + it.col(), inv_alpha * it.value());
    SpMat K(2 * F, 2 * F);
    K.setFromTriplets(trips.begin(), trips.end());

    Vector rhs(2 * F);
    rhs.head(F) = rhs_state_base + sys.restrict_free(b_active);
    rhs.tail(F) = rhs_costate_base;

    const Vector yp = sparse_solve(K, rhs, /*symmetric_positive=*/false, &sol.warnings);
    sol.Y = sys.extend_free(yp.head(F), sys.dirichlet);
    sol.P = sys.extend_free(yp.tail(F), Vector::Zero(sys.dofmap.size()));

    // Relabel from the new costate. The iterate's own control pairs the new
    // costate with the labels the sweep was solved at.
    const std::vector<double> p_at_q = costate_at_points(sys, sol.P);
    std::vector<PointLabel> next(nq);
    std::vector<double> u_now(nq), u_iterate(nq);
    for (int q = 0; q < nq; ++q) {
      const double t = -p_at_q[q] / sys.alpha;
      if (t <= sys.u0_at_q[q])
        next[q] = PointLabel::lower;
      else if (t >= sys.u1_at_q[q])
        next[q] = PointLabel::upper;
      else
        next[q] = PointLabel::inactive;
      u_now[q] = std::min(sys.u1_at_q[q], std::max(sys.u0_at_q[q], t));
      u_iterate[q] = sol.labels[q] == PointLabel::inactive
                         ? t
                         : (sol.labels[q] == PointLabel::lower ? sys.u0_at_q[q]
                                                               : sys.u1_at_q[q]);
    }
    sol.objective_history.push_back(objective_value(sys, sol.Y, u_iterate));

    const bool labels_fixed = next == sol.labels;
    double du = 0.0;
    if (!u_prev.empty())
      for (int q = 0; q < nq; ++q) {
        const double d = u_now[q] - u_prev[q];
        du += sys.cache.weights[q] * d * d;
      }
    const bool control_fixed = !u_prev.empty() && std::sqrt(du) < 1e-12;
    u_prev = std::move(u_now);
    sol.labels = std::move(next);

    if (labels_fixed || control_fixed) {
      sol.converged = true;
      return sol;
    }
    const auto [it_seen, inserted] = seen_label_sets.insert({label_hash(), iter});
    if (!inserted) {
      sol.warnings.push_back("active-set cycling detected: label set of iteration " +
                             std::to_string(iter) + " repeats iteration " +
                             std::to_string(it_seen->second));
      return sol;
    }
  }
  sol.warnings.push_back("active-set iteration did not converge within " +
                         std::to_string(max_iterations) + " sweeps");
  return sol;
}

Solution ssn_solve(const Mesh& mesh, const ControlProblem& problem, const AssemblyOptions& options,
                   int max_iterations) {
  AssembledSystem sys = assemble_system(mesh, problem, options);
  Solution sol = ssn_solve(sys, max_iterations);
  sol.warnings.insert(sol.warnings.begin(), sys.warnings.begin(), sys.warnings.end());
  return sol;
}

}  // namespace xfemopt
