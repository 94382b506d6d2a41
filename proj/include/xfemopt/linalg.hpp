#ifndef XFEMOPT_LINALG_HPP
#define XFEMOPT_LINALG_HPP

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace xfemopt {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct LinalgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Duplicate-merging triplet accumulator for symmetric-flagged or general
/// square sparse matrices. finalize() compresses, drops stored zeros and,
/// when flagged symmetric, verifies |A - A^T|_max < 1e-12 |A|_max.
class SparseAccumulator {
 public:
  explicit SparseAccumulator(int dimension, bool symmetric = false)
      : dim_(dimension), symmetric_(symmetric) {}

  int dimension() const { return dim_; }

  void accumulate(int i, int j, double value) {
    if (i < 0 || i >= dim_ || j < 0 || j >= dim_)
      throw LinalgError("accumulate index (" + std::to_string(i) + "," + std::to_string(j) +
                        ") out of range for dimension " + std::to_string(dim_));
    triplets_.emplace_back(i, j, value);
  }

  SpMat finalize() const;

 private:
  int dim_;
  bool symmetric_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

/// Direct solve A x = b. Symmetric positive definite paths use a Cholesky
/// factorization whose diagonal is scanned for near-zero pivots (enrichment
/// near-dependence shows up there); general matrices go through sparse LU.
/// Warnings name the offending unknown; singular systems throw.
Vector sparse_solve(const SpMat& A, const Vector& b, bool symmetric_positive,
                    std::vector<std::string>* warnings = nullptr);

/// Relative max-norm asymmetry |A - A^T|_max / |A|_max (0 for empty A).
double symmetry_defect(const SpMat& A);

}  // namespace xfemopt

#endif
