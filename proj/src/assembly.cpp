#include "xfemopt/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <thread>

#include "xfemopt/geometry.hpp"

namespace xfemopt {

namespace {

struct ElementEval {
  QuadratureRule rule;
  std::vector<int> entries;
  std::vector<double> values, gx, gy;  // point-major rows
};

ElementEval evaluate_element(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                             const EnrichmentConfig& config, int element, RulePurpose purpose,
                             const AssemblyOptions& options) {
  ElementEval ev;
  ev.rule = options.degree_override
                ? standard_rule(mesh.triangle_points(element), *options.degree_override)
                : select_rule(mesh, element, geom, config, purpose);

  std::vector<ShapeValue> shape;
  const int nq = ev.rule.size();
  std::vector<std::vector<ShapeValue>> rows(nq);
  size_t k = 0;
  for (int q = 0; q < nq; ++q) {
    shape_eval(mesh, dofmap, geom, config, element, ev.rule.points[q], FaceSide::automatic, shape);
    rows[q] = shape;
    k = shape.size();
  }
  // Drop entries that vanish identically on this element (e.g. the global
  // singular function outside the cut-off support).
  std::vector<char> keep(k, 0);
  for (int q = 0; q < nq; ++q)
    for (size_t j = 0; j < k; ++j)
      if (rows[q][j].value != 0.0 || rows[q][j].grad.squaredNorm() != 0.0) keep[j] = 1;
  for (size_t j = 0; j < k; ++j)
    if (keep[j]) ev.entries.push_back(rows[0][j].entry);
  const size_t kk = ev.entries.size();
  ev.values.resize(nq * kk);
  ev.gx.resize(nq * kk);
  ev.gy.resize(nq * kk);
  for (int q = 0; q < nq; ++q) {
    size_t col = 0;
    for (size_t j = 0; j < k; ++j) {
      if (!keep[j]) continue;
      ev.values[q * kk + col] = rows[q][j].value;
      ev.gx[q * kk + col] = rows[q][j].grad.x();
      ev.gy[q * kk + col] = rows[q][j].grad.y();
      ++col;
    }
  }
  return ev;
}

}  // namespace

QuadCache build_quad_cache(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                           const EnrichmentConfig& config, RulePurpose purpose,
                           const AssemblyOptions& options) {
  const int ne = mesh.num_triangles();
  std::vector<ElementEval> evals(ne);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int chunks = options.parallel ? static_cast<int>(std::min<unsigned>(hw, 8)) : 1;
  if (chunks > 1) {
    std::vector<std::future<void>> jobs;
    const int per = (ne + chunks - 1) / chunks;
    for (int c = 0; c < chunks; ++c) {
      const int lo = c * per, hi = std::min(ne, lo + per);
      jobs.push_back(std::async(std::launch::async, [&, lo, hi] {
        for (int e = lo; e < hi; ++e)
          evals[e] = evaluate_element(mesh, dofmap, geom, config, e, purpose, options);
      }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (int e = 0; e < ne; ++e)
      evals[e] = evaluate_element(mesh, dofmap, geom, config, e, purpose, options);
  }

  QuadCache cache;
  cache.mesh = &mesh;
  cache.blocks.resize(ne);
  for (int e = 0; e < ne; ++e) {
    auto& ev = evals[e];
    QuadCache::Block b;
    b.q_begin = cache.num_points();
    b.entry_begin = static_cast<int>(cache.entries.size());
    b.val_begin = static_cast<long>(cache.values.size());
    cache.points.insert(cache.points.end(), ev.rule.points.begin(), ev.rule.points.end());
    cache.weights.insert(cache.weights.end(), ev.rule.weights.begin(), ev.rule.weights.end());
    cache.entries.insert(cache.entries.end(), ev.entries.begin(), ev.entries.end());
    cache.values.insert(cache.values.end(), ev.values.begin(), ev.values.end());
    cache.grad_x.insert(cache.grad_x.end(), ev.gx.begin(), ev.gx.end());
    cache.grad_y.insert(cache.grad_y.end(), ev.gy.begin(), ev.gy.end());
    b.q_end = cache.num_points();
    b.entry_end = static_cast<int>(cache.entries.size());
    cache.blocks[e] = b;
    ev = ElementEval{};  // release as we go
  }
  return cache;
}

namespace {

template <typename PointTerm>
SpMat assemble_bilinear(const QuadCache& cache, const DofMap& dofmap, PointTerm&& term) {
  SparseAccumulator acc(dofmap.size(), /*symmetric=*/false);
  std::vector<double> local;
  for (const auto& b : cache.blocks) {
    const int k = b.entry_end - b.entry_begin;
    if (k == 0) continue;
    local.assign(static_cast<size_t>(k) * k, 0.0);
    for (int q = b.q_begin; q < b.q_end; ++q) {
      const long row = b.val_begin + static_cast<long>(q - b.q_begin) * k;
      const double w = cache.weights[q];
      for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) local[i * k + j] += term(w, q, row + i, row + j);
    }
    for (int i = 0; i < k; ++i) {
      const int gi = cache.entries[b.entry_begin + i];
      for (int j = i; j < k; ++j) {
        const int gj = cache.entries[b.entry_begin + j];
        acc.accumulate(gi, gj, local[i * k + j]);
        if (j != i) acc.accumulate(gj, gi, local[i * k + j]);
      }
    }
  }
  return acc.finalize();
}

}  // namespace

SpMat assemble_operator(const QuadCache& cache, const DofMap& dofmap, double reaction) {
  return assemble_bilinear(cache, dofmap, [&](double w, int, long a, long b) {
    double t = cache.grad_x[a] * cache.grad_x[b] + cache.grad_y[a] * cache.grad_y[b];
    if (reaction != 0.0) t += reaction * cache.values[a] * cache.values[b];
    return w * t;
  });
}

SpMat assemble_mass(const QuadCache& cache, const DofMap& dofmap) {
  return assemble_bilinear(cache, dofmap, [&](double w, int, long a, long b) {
    return w * cache.values[a] * cache.values[b];
  });
}

SpMat assemble_indicator_mass(const QuadCache& cache, const DofMap& dofmap,
                              const std::function<bool(int, const Vec2&)>& indicator) {
  return assemble_bilinear(cache, dofmap, [&](double w, int q, long a, long b) {
    return indicator(q, cache.points[q]) ? w * cache.values[a] * cache.values[b] : 0.0;
  });
}

Vector assemble_load(const QuadCache& cache, const DofMap& dofmap,
                     std::span<const double> point_values) {
  Vector F = Vector::Zero(dofmap.size());
  for (const auto& b : cache.blocks) {
    const int k = b.entry_end - b.entry_begin;
    for (int q = b.q_begin; q < b.q_end; ++q) {
      const long row = b.val_begin + static_cast<long>(q - b.q_begin) * k;
      const double wf = cache.weights[q] * point_values[q];
      if (wf == 0.0) continue;
      for (int j = 0; j < k; ++j) F[cache.entries[b.entry_begin + j]] += wf * cache.values[row + j];
    }
  }
  return F;
}

Vector assemble_load(const QuadCache& cache, const DofMap& dofmap, const Field& field) {
  std::vector<double> vals(cache.num_points());
  for (int q = 0; q < cache.num_points(); ++q) vals[q] = field(cache.points[q]);
  return assemble_load(cache, dofmap, vals);
}

Vector assemble_active_load(const QuadCache& cache, const DofMap& dofmap, const BoundsField& bounds,
                            std::span<const PointLabel> labels) {
  Vector F = Vector::Zero(dofmap.size());
  for (const auto& b : cache.blocks) {
    const int k = b.entry_end - b.entry_begin;
    for (int q = b.q_begin; q < b.q_end; ++q) {
      if (labels[q] == PointLabel::inactive) continue;
      const Vec2& x = cache.points[q];
      const double u = labels[q] == PointLabel::lower ? bounds.lower_at(x) : bounds.upper_at(x);
      const double wf = cache.weights[q] * u;
      const long row = b.val_begin + static_cast<long>(q - b.q_begin) * k;
      for (int j = 0; j < k; ++j) F[cache.entries[b.entry_begin + j]] += wf * cache.values[row + j];
    }
  }
  return F;
}

namespace {

// Outer-boundary edges, split where the crack line crosses them (unfitted
// crack meshes only), each paired with its host triangle.
struct BoundaryPiece {
  Vec2 a, b;
  int element;
};

std::vector<BoundaryPiece> strong_boundary_pieces(const Mesh& mesh, const CornerGeometry& geom) {
  std::map<std::pair<int, int>, int> edge_to_tri;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      const auto mm = std::minmax(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]);
      edge_to_tri.insert({{mm.first, mm.second}, t});
    }

  std::vector<BoundaryPiece> pieces;
  for (const auto& be : mesh.boundary_edges) {
    const auto mm = std::minmax(be.a, be.b);
    const int tri = edge_to_tri.at({mm.first, mm.second});
    const Vec2 pa = mesh.nodes[be.a], pb = mesh.nodes[be.b];
    bool split = false;
    if (geom.has_crack() && be.tag == BoundaryTag::outer) {
      // Split at a crack-line crossing so the Heaviside jump is not smeared.
      const Vec2 n = geom.crack_normal();
      const double sa = (pa - geom.tip).dot(n), sb = (pb - geom.tip).dot(n);
      if ((sa > kGeomTol && sb < -kGeomTol) || (sa < -kGeomTol && sb > kGeomTol)) {
        const double t = sa / (sa - sb);
        const Vec2 mid = pa + t * (pb - pa);
        pieces.push_back({pa, mid, tri});
        pieces.push_back({mid, pb, tri});
        split = true;
      }
    }
    if (!split) pieces.push_back({pa, pb, tri});
  }
  return pieces;
}

}  // namespace

Vector project_boundary_data(const Mesh& mesh, const DofMap& dofmap, const CornerGeometry& geom,
                             const EnrichmentConfig& config, const Field& data,
                             std::vector<std::string>* warnings) {
  std::vector<int> cons;
  std::vector<int> cons_index(dofmap.size(), -1);
  for (int e = 0; e < dofmap.size(); ++e)
    if (dofmap.constrained[e]) {
      cons_index[e] = static_cast<int>(cons.size());
      cons.push_back(e);
    }
  Vector full = Vector::Zero(dofmap.size());
  if (cons.empty()) return full;

  SparseAccumulator B(static_cast<int>(cons.size()), /*symmetric=*/false);
  Vector r = Vector::Zero(cons.size());
  std::vector<ShapeValue> shape;
  for (const auto& piece : strong_boundary_pieces(mesh, geom)) {
    const QuadratureRule rule = graded_segment_rule(piece.a, piece.b, geom, 6);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& x = rule.points[q];
      const double w = rule.weights[q];
      shape_eval(mesh, dofmap, geom, config, piece.element, x, FaceSide::automatic, shape);
      const double g = data(x);
      for (const auto& si : shape) {
        const int ci = cons_index[si.entry];
        if (ci < 0) continue;
        r[ci] += w * g * si.value;
        for (const auto& sj : shape) {
          const int cj = cons_index[sj.entry];
          if (cj >= 0) B.accumulate(ci, cj, w * si.value * sj.value);
        }
      }
    }
  }

  Vector g;
  try {
    g = sparse_solve(B.finalize(), r, /*symmetric_positive=*/true, warnings);
  } catch (const LinalgError& e) {
    throw LinalgError(std::string("boundary trace projection failed (duplicate or "
                                  "zero-trace constrained dofs?): ") +
                      e.what());
  }
  for (size_t i = 0; i < cons.size(); ++i) full[cons[i]] = g[static_cast<Eigen::Index>(i)];
  return full;
}

SpMat restrict_free_free(const SpMat& A, const DofMap& dofmap) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int fi = dofmap.free_index[it.row()];
      const int fj = dofmap.free_index[it.col()];
      if (fi >= 0 && fj >= 0) trips.emplace_back(fi, fj, it.value());
    }
  SpMat out(dofmap.num_free(), dofmap.num_free());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

Vector AssembledSystem::restrict_free(const Vector& full) const {
  Vector out(dofmap.num_free());
  for (int f = 0; f < dofmap.num_free(); ++f) out[f] = full[dofmap.free_entries[f]];
  return out;
}

Vector AssembledSystem::extend_free(const Vector& free_part, const Vector& constrained_full) const {
  Vector out = constrained_full;
  for (int f = 0; f < dofmap.num_free(); ++f) out[dofmap.free_entries[f]] = free_part[f];
  return out;
}

namespace {

bool mesh_is_fitted(const Mesh& mesh) {
  for (const auto& be : mesh.boundary_edges)
    if (be.tag != BoundaryTag::outer) return true;
  return false;
}

// Symmetric Nitsche (or penalty) terms imposing Dirichlet data on both faces
// of an embedded crack. Returns the data-dependent rhs; matrix terms go into
// `acc`.
Vector assemble_crack_face_terms(const Mesh& mesh, const DofMap& dofmap,
                                 const CornerGeometry& geom, const EnrichmentConfig& config,
                                 const AssemblyOptions& options, const Field& data,
                                 SparseAccumulator& acc) {
  Vector rhs = Vector::Zero(dofmap.size());
  std::vector<ShapeValue> shape;
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const TrianglePoints tri = mesh.triangle_points(e);
    if (!is_cut_element(tri, geom)) continue;

    // Crack sub-segment inside this element.
    double t0 = 0.0, t1 = 1.0;
    const Vec2 s0 = geom.tip, d = geom.crack_origin - geom.tip;
    const double orient = signed_area(tri[0], tri[1], tri[2]) > 0.0 ? 1.0 : -1.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = tri[k];
      const Vec2& q = tri[(k + 1) % 3];
      const Vec2 inward = orient * Vec2(-(q - p).y(), (q - p).x());
      const double f0 = (s0 - p).dot(inward), fd = d.dot(inward);
      if (std::abs(fd) < 1e-300) continue;
      const double t = -f0 / fd;
      if (fd > 0.0)
        t0 = std::max(t0, t);
      else
        t1 = std::min(t1, t);
    }
    if (t1 <= t0) continue;
    const Vec2 pa = s0 + t0 * d, pb = s0 + t1 * d;
    const double h_e = mesh.triangle_diameter(e);
    const double gamma = options.nitsche_gamma;
    const bool penalty_only = options.crack_bc == CrackFaceBC::penalty_only;
    const double penalty = penalty_only ? gamma / (h_e * h_e) : gamma / h_e;

    const QuadratureRule rule = graded_segment_rule(pa, pb, geom, 6);
    const Vec2 n_crack = geom.crack_normal();
    for (int sside = 0; sside < 2; ++sside) {
      const FaceSide side = sside == 0 ? FaceSide::upper : FaceSide::lower;
      // Outward normal of the domain on this face.
      const Vec2 n_out = sside == 0 ? Vec2(-n_crack) : n_crack;
      for (int q = 0; q < rule.size(); ++q) {
        const Vec2& x = rule.points[q];
        const double w = rule.weights[q];
        shape_eval(mesh, dofmap, geom, config, e, x, side, shape);
        const double g = data ? data(x) : 0.0;
        for (const auto& si : shape) {
          const double flux_i = si.grad.dot(n_out);
          if (penalty_only)
            rhs[si.entry] += w * g * penalty * si.value;
          else
            rhs[si.entry] += w * g * (penalty * si.value - flux_i);
          for (const auto& sj : shape) {
            const double flux_j = sj.grad.dot(n_out);
            double term = penalty * si.value * sj.value;
            if (!penalty_only) term += -flux_i * sj.value - flux_j * si.value;
            acc.accumulate(si.entry, sj.entry, w * term);
          }
        }
      }
    }
  }
  return rhs;
}

}  // namespace

AssembledSystem assemble_system(const Mesh& mesh, const ControlProblem& problem,
                                const AssemblyOptions& options) {
  AssembledSystem sys;
  sys.mesh = &mesh;
  sys.geom = problem.geom;
  sys.config = problem.config;
  sys.options = options;
  sys.alpha = problem.alpha;
  sys.bounds = problem.bounds;
  sys.dofmap = classify_nodes(mesh, problem.geom, problem.config);
  sys.warnings = sys.dofmap.warnings;

  sys.cache = build_quad_cache(mesh, sys.dofmap, sys.geom, sys.config, RulePurpose::assembly,
                               options);

  const int nq = sys.cache.num_points();
  sys.f_at_q.resize(nq);
  sys.yd_at_q.resize(nq);
  sys.u0_at_q.resize(nq);
  sys.u1_at_q.resize(nq);
  for (int q = 0; q < nq; ++q) {
    const Vec2& x = sys.cache.points[q];
    sys.f_at_q[q] = problem.f ? problem.f(x) : 0.0;
    sys.yd_at_q[q] = problem.y_d ? problem.y_d(x) : 0.0;
    sys.u0_at_q[q] = problem.bounds.lower_at(x);
    sys.u1_at_q[q] = problem.bounds.upper_at(x);
  }

  // Operator with optional crack-face terms folded in.
  {
    SparseAccumulator acc(sys.dofmap.size(), /*symmetric=*/false);
    const SpMat A_vol = assemble_operator(sys.cache, sys.dofmap, problem.reaction);
    for (int k = 0; k < A_vol.outerSize(); ++k)
      for (SpMat::InnerIterator it(A_vol, k); it; ++it)
        acc.accumulate(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    sys.nitsche_rhs = Vector::Zero(sys.dofmap.size());
    const bool embedded_crack = sys.geom.has_crack() && !mesh_is_fitted(mesh) &&
                                sys.config.method != Method::p1_plain &&
                                options.crack_bc != CrackFaceBC::none;
    if (embedded_crack)
      sys.nitsche_rhs = assemble_crack_face_terms(mesh, sys.dofmap, sys.geom, sys.config, options,
                                                  problem.y_b, acc);
    sys.A = acc.finalize();
    const double defect = symmetry_defect(sys.A);
    if (defect >= 1e-12)
      sys.warnings.push_back("operator asymmetry " + std::to_string(defect));
  }

  sys.M = assemble_mass(sys.cache, sys.dofmap);
  sys.F1 = assemble_load(sys.cache, sys.dofmap,
                         std::span<const double>(sys.f_at_q.data(), sys.f_at_q.size()));
  sys.F2 = assemble_load(sys.cache, sys.dofmap,
                         std::span<const double>(sys.yd_at_q.data(), sys.yd_at_q.size()));

  sys.dirichlet = problem.y_b ? project_boundary_data(mesh, sys.dofmap, sys.geom, sys.config,
                                                      problem.y_b, &sys.warnings)
                              : Vector::Zero(sys.dofmap.size());

  sys.A_ff = restrict_free_free(sys.A, sys.dofmap);
  sys.M_ff = restrict_free_free(sys.M, sys.dofmap);
  return sys;
}

}  // namespace xfemopt
