#ifndef XFEMOPT_ENRICHMENT_HPP
#define XFEMOPT_ENRICHMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xfemopt/mesh.hpp"

namespace xfemopt {

/// C^2 radial cut-off: 1 on [0, r0], 0 on [r1, inf), quintic Hermite
/// transition in between.
struct CutoffSpec {
  double r0 = 0.01;
  double r1 = 0.99;
};

/// (chi, dchi/dr) at radius r.
std::pair<double, double> cutoff_eval(const CutoffSpec& spec, double r);

enum class Method { cut_xfem, classic_xfem, p1_plain };

std::string to_string(Method m);

struct EnrichmentConfig {
  Method method = Method::cut_xfem;
  double r_s = 0.5;      // enrichment radius (classic_xfem)
  CutoffSpec cutoff;     // cut_xfem
};

/// Side of the crack used when evaluating exactly on it. `automatic` resolves
/// by the Heaviside sign (points on the crack count as upper).
enum class FaceSide : uint8_t { automatic, upper, lower };

struct PolarCoords {
  double r = 0.0;
  double theta = 0.0;
  bool at_tip = false;
};

/// Polar coordinates around the corner: r = |p - tip|, theta swept from the
/// first corner edge through the domain interior, theta in [0, pi/beta].
PolarCoords polar_coords(const Vec2& p, const CornerGeometry& geom,
                         FaceSide side = FaceSide::automatic);

struct SingularEval {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();  // Cartesian frame; undefined at r = 0
};

/// S_beta(r, theta) = r^beta sin(beta theta) and its Cartesian gradient.
/// |gradient| = beta r^(beta-1); the caller must keep quadrature away from
/// r = 0 where the gradient blows up.
SingularEval singular_eval(double beta, double r, double theta, const CornerGeometry& geom);

/// +1 on and above the crack ((p - tip) . n >= 0), -1 below. beta = 1/2 only.
int heaviside(const Vec2& p, const CornerGeometry& geom);

enum class DofKind : uint8_t { standard, heaviside, nodal_singular, global_singular };

/// Global degree-of-freedom layout for the enriched spaces: all standard
/// (hat) dofs in node order, then Heaviside dofs, then nodal singular dofs,
/// then the single global singular dof (cut_xfem).
struct DofMap {
  struct Entry {
    DofKind kind;
    int node;  // -1 for global_singular
  };

  std::vector<Entry> entries;
  std::vector<char> constrained;  // entries with nonzero trace on the strong boundary
  std::vector<int> theta_S;       // sorted node indices
  std::vector<int> theta_H;

  // lookups
  std::vector<int> heaviside_entry_of_node;  // -1 if none
  std::vector<int> singular_entry_of_node;
  int global_entry = -1;

  std::vector<int> free_index;  // entry -> free position, -1 when constrained
  std::vector<int> free_entries;
  std::vector<char> node_on_strong_boundary;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(entries.size()); }
  int num_free() const { return static_cast<int>(free_entries.size()); }
};

DofMap classify_nodes(const Mesh& mesh, const CornerGeometry& geom, const EnrichmentConfig& config);

struct ShapeValue {
  int entry;
  double value;
  Vec2 grad;
};

/// All basis functions supported on `element`, evaluated at `point` (which
/// must lie in the closed element and away from the tip when enrichment
/// gradients are required). Enrichments are the plain products phi*H,
/// phi*S_beta and the global chi(r)*S_beta.
void shape_eval(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                const EnrichmentConfig& config, int element, const Vec2& point, FaceSide side,
                std::vector<ShapeValue>& out);

}  // namespace xfemopt

#endif
