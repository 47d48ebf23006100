#pragma once

#include <Eigen/SparseLU>

#include <memory>
#include <utility>
#include <vector>

#include "ccbm/fem.hpp"
#include "ccbm/types.hpp"

namespace ccbm {

/// Sparse LU factorization of the coupled 2n x 2n real block matrix
///   S = [A -C; C A],
/// the common coefficient matrix of the right-hand-side, forward and
/// adjoint solves. Factored once per (mesh, zeta) and reused; immutable
/// after construction.
class BlockFactor {
 public:
  explicit BlockFactor(const FemSystem& fem);

  /// Solves S [u1; u2] = [rhs_r; rhs_i].
  std::pair<Vector, Vector> solve(const Vector& rhs_r, const Vector& rhs_i) const;

  int block_dim() const { return n_; }
  Index nonzeros_matrix() const { return nnz_matrix_; }
  Index nonzeros_factor() const { return nnz_factor_; }

 private:
  int n_ = 0;
  Index nnz_matrix_ = 0;
  Index nnz_factor_ = 0;
  // SparseLU is not copyable; keep it behind a pointer so BlockFactor can move.
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

inline BlockFactor factorize(const FemSystem& fem) { return BlockFactor(fem); }

inline std::pair<Vector, Vector> solve_block(const BlockFactor& factor, const Vector& rhs_r,
                                             const Vector& rhs_i) {
  return factor.solve(rhs_r, rhs_i);
}

/// Singular values of a small dense matrix (rows, cols <= 64) in descending
/// order, obtained from a cyclic-Jacobi eigendecomposition of the Gram
/// matrix of the shorter side.
std::vector<Scalar> singular_values(const Matrix& b);

}  // namespace ccbm
