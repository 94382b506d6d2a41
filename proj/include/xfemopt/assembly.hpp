#ifndef XFEMOPT_ASSEMBLY_HPP
#define XFEMOPT_ASSEMBLY_HPP

#include <functional>
#include <limits>
#include <optional>
#include <span>

#include "xfemopt/enrichment.hpp"
#include "xfemopt/linalg.hpp"
#include "xfemopt/mesh.hpp"
#include "xfemopt/quadrature.hpp"

namespace xfemopt {

using Field = std::function<double(const Vec2&)>;

/// Box bounds as fields; absent means unbounded on that side.
struct BoundsField {
  std::optional<Field> lower;
  std::optional<Field> upper;

  double lower_at(const Vec2& x) const {
    return lower ? (*lower)(x) : -std::numeric_limits<double>::infinity();
  }
  double upper_at(const Vec2& x) const {
    return upper ? (*upper)(x) : std::numeric_limits<double>::infinity();
  }
};

/// min J(y,u) = 1/2 |y - y_d|^2 + alpha/2 |u|^2  subject to
/// -lap(y) + reaction*y = u + f, y = y_b on the boundary, u0 <= u <= u1.
struct ControlProblem {
  CornerGeometry geom;
  EnrichmentConfig config;
  double reaction = 0.0;  // coefficient of the zeroth-order term (0 or 1)
  Field f;
  Field y_d;
  double alpha = 1.0;
  BoundsField bounds;
  Field y_b;  // Dirichlet data (outer boundary and crack faces)
};

/// How Dirichlet data is imposed on embedded crack faces of unfitted meshes.
enum class CrackFaceBC { nitsche, penalty_only, none };

struct AssemblyOptions {
  CrackFaceBC crack_bc = CrackFaceBC::nitsche;
  double nitsche_gamma = 100.0;
  std::optional<int> degree_override;  // force one standard rule everywhere (tests)
  bool parallel = false;
};

/// Per-quadrature-point active-set label.
enum class PointLabel : uint8_t { inactive, lower, upper };

/// Quadrature points for the whole mesh with all basis values and gradients
/// evaluated once. Entry lists are per element; values are stored
/// point-major in the element's entry order.
struct QuadCache {
  struct Block {
    int q_begin, q_end;          // range in points/weights
    int entry_begin, entry_end;  // range in entries
    long val_begin;              // range in values/grads, row stride = #entries
  };

  const Mesh* mesh = nullptr;
  std::vector<Block> blocks;  // one per element
  std::vector<int> entries;
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::vector<double> values;
  std::vector<double> grad_x, grad_y;

  int num_points() const { return static_cast<int>(points.size()); }

  /// sum_i coeff[entry_i] * value_i at cached point q of element block b.
  double eval(const Block& b, int q, const Vector& coeff) const {
    const int k = b.entry_end - b.entry_begin;
    const long row = b.val_begin + static_cast<long>(q - b.q_begin) * k;
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += coeff[entries[b.entry_begin + j]] * values[row + j];
    return s;
  }
};

QuadCache build_quad_cache(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                           const EnrichmentConfig& config, RulePurpose purpose,
                           const AssemblyOptions& options = {});

/// A(i,j) = int grad(psi_i).grad(psi_j) + reaction * psi_i psi_j.
SpMat assemble_operator(const QuadCache& cache, const DofMap& dofmap, double reaction);
/// M(i,j) = int psi_i psi_j.
SpMat assemble_mass(const QuadCache& cache, const DofMap& dofmap);
/// F(j) = int field * psi_j.
Vector assemble_load(const QuadCache& cache, const DofMap& dofmap, const Field& field);
Vector assemble_load(const QuadCache& cache, const DofMap& dofmap,
                     std::span<const double> point_values);
/// M_ind(i,j) = sum_q w_q ind(q) psi_i psi_j over the cached points, so
/// M_ind + M_(1-ind) reproduces assemble_mass exactly.
SpMat assemble_indicator_mass(const QuadCache& cache, const DofMap& dofmap,
                              const std::function<bool(int, const Vec2&)>& indicator);
/// Load of the bound functions over the active regions.
Vector assemble_active_load(const QuadCache& cache, const DofMap& dofmap, const BoundsField& bounds,
                            std::span<const PointLabel> labels);

struct AssembledSystem {
  const Mesh* mesh = nullptr;
  DofMap dofmap;
  CornerGeometry geom;
  EnrichmentConfig config;
  AssemblyOptions options;
  double alpha = 1.0;
  BoundsField bounds;

  QuadCache cache;
  SpMat A;             // operator incl. crack-face Nitsche terms
  SpMat M;             // mass
  Vector F1, F2;       // loads of f and y_d
  Vector nitsche_rhs;  // state-data terms from the crack faces
  Vector dirichlet;    // full-size vector; constrained entries carry g_c

  SpMat A_ff, M_ff;  // free-free blocks
  Vector f_at_q, yd_at_q, u0_at_q, u1_at_q;

  std::vector<std::string> warnings;

  Vector restrict_free(const Vector& full) const;
  Vector extend_free(const Vector& free_part, const Vector& constrained_full) const;
};

/// Assembles operator, mass, loads, crack-face Nitsche terms and the strong
/// boundary projection for the given problem.
AssembledSystem assemble_system(const Mesh& mesh, const ControlProblem& problem,
                                const AssemblyOptions& options = {});

/// L2 projection of boundary data onto the constrained-entry traces: solves
/// the boundary Gram system B g = r over the strong (outer, plus crack faces
/// on fitted meshes) boundary. Returns a full-size vector supported on the
/// constrained entries.
Vector project_boundary_data(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                             const EnrichmentConfig& config, const Field& data,
                             std::vector<std::string>* warnings = nullptr);

/// Keep only rows/cols with free indices.
SpMat restrict_free_free(const SpMat& A, const DofMap& dofmap);

}  // namespace xfemopt

#endif
