#include "xfemopt/linalg.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace xfemopt {

double symmetry_defect(const SpMat& A) {
  double amax = 0.0, dmax = 0.0;
  SpMat D = SpMat(A.transpose()) - A;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  return amax > 0.0 ? dmax / amax : 0.0;
}

SpMat SparseAccumulator::finalize() const {
  SpMat A(dim_, dim_);
  A.setFromTriplets(triplets_.begin(), triplets_.end());
  A.prune([](int, int, double v) { return v != 0.0; });
  A.makeCompressed();
  if (symmetric_ && symmetry_defect(A) >= 1e-12)
    throw LinalgError("matrix flagged symmetric fails the symmetry check");
  return A;
}

Vector sparse_solve(const SpMat& A, const Vector& b, bool symmetric_positive,
                    std::vector<std::string>* warnings) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw LinalgError("solve dimension mismatch");

  if (symmetric_positive) {
    Eigen::SimplicialLDLT<SpMat> ldlt;
    ldlt.compute(A);
    if (ldlt.info() == Eigen::Success) {
      const auto& d = ldlt.vectorD();
      double dmax = 0.0;
      for (Eigen::Index i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d[i]));
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (std::abs(d[i]) <= 1e-13 * dmax) {
          const Eigen::Index dof = ldlt.permutationPinv().indices()[i];
          if (std::abs(d[i]) == 0.0)
            throw LinalgError("zero pivot at unknown " + std::to_string(dof));
          if (warnings)
            warnings->push_back("near-zero pivot at unknown " + std::to_string(dof) +
                                " (possible enrichment near-dependence)");
        }
      }
      return ldlt.solve(b);
    }
    // fall through to LU when the matrix turns out indefinite
  }

  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw LinalgError("singular system (zero pivot): " + lu.lastErrorMessage());
  return lu.solve(b);
}

}  // namespace xfemopt
