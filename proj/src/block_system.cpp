#include "ccbm/block_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccbm {

namespace {

SparseMatrix build_block_matrix(const FemSystem& fem) {
  const int n = fem.n;
  std::vector<Triplet> triplets;
  triplets.reserve(2 * (fem.A.nonZeros() + fem.C.nonZeros()));
  for (int col = 0; col < fem.A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(fem.A, col); it; ++it) {
      triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
      triplets.emplace_back(static_cast<int>(it.row()) + n, col + n, it.value());
    }
  }
  for (int col = 0; col < fem.C.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(fem.C, col); it; ++it) {
      triplets.emplace_back(static_cast<int>(it.row()), col + n, -it.value());
      triplets.emplace_back(static_cast<int>(it.row()) + n, col, it.value());
    }
  }
  SparseMatrix s(2 * n, 2 * n);
  s.setFromTriplets(triplets.begin(), triplets.end());
  s.makeCompressed();
  return s;
}

}  // namespace

BlockFactor::BlockFactor(const FemSystem& fem) : n_(fem.n) {
  const SparseMatrix s = build_block_matrix(fem);
  nnz_matrix_ = s.nonZeros();
  if (nnz_matrix_ == 0) {
    throw NumericalError("factorize: coupled block system is empty");
  }
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(s);
  lu_->factorize(s);
  if (lu_->info() != Eigen::Success) {
    throw NumericalError("factorize: coupled block system is numerically singular; "
                         "the assembled matrices are inconsistent");
  }
  nnz_factor_ = lu_->nnzL() + lu_->nnzU();
}

std::pair<Vector, Vector> BlockFactor::solve(const Vector& rhs_r, const Vector& rhs_i) const {
  if (rhs_r.size() != n_ || rhs_i.size() != n_) {
    throw ParameterError("solve_block: rhs length " + std::to_string(rhs_r.size()) + "/" +
                         std::to_string(rhs_i.size()) + " does not match block dimension " +
                         std::to_string(n_));
  }
  Vector rhs(2 * n_);
  rhs << rhs_r, rhs_i;
  const Vector sol = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success) {
    throw NumericalError("solve_block: triangular solve failed");
  }
  return {sol.head(n_), sol.tail(n_)};
}

std::vector<Scalar> singular_values(const Matrix& b) {
  if (b.rows() > 64 || b.cols() > 64) {
    throw ParameterError("singular_values: matrix larger than 64 x 64");
  }
  if (!b.allFinite()) {
    throw ParameterError("singular_values: nonfinite entries");
  }
  // Gram matrix of the shorter side, so eigenvalues are squared singular values.
  Matrix g = (b.rows() >= b.cols()) ? Matrix(b.transpose() * b) : Matrix(b * b.transpose());
  const Index m = g.rows();
  if (m == 0) return {};

  // cyclic Jacobi sweeps
  const Scalar scale = std::max(g.cwiseAbs().maxCoeff(), Scalar(1e-300));
  for (int sweep = 0; sweep < 60; ++sweep) {
    Scalar off = 0;
    for (Index p = 0; p + 1 < m; ++p) {
      for (Index q = p + 1; q < m; ++q) {
        off = std::max(off, std::abs(g(p, q)));
      }
    }
    if (off <= 1e-17 * scale) break;
    for (Index p = 0; p + 1 < m; ++p) {
      for (Index q = p + 1; q < m; ++q) {
        const Scalar apq = g(p, q);
        if (std::abs(apq) <= 1e-20 * scale) continue;
        const Scalar theta = (g(q, q) - g(p, p)) / (2 * apq);
        const Scalar t = (theta >= 0 ? 1 : -1) /
                         (std::abs(theta) + std::sqrt(1 + theta * theta));
        const Scalar c = 1 / std::sqrt(1 + t * t);
        const Scalar s = t * c;
        for (Index k = 0; k < m; ++k) {
          const Scalar gkp = g(k, p), gkq = g(k, q);
          g(k, p) = c * gkp - s * gkq;
          g(k, q) = s * gkp + c * gkq;
        }
        for (Index k = 0; k < m; ++k) {
          const Scalar gpk = g(p, k), gqk = g(q, k);
          g(p, k) = c * gpk - s * gqk;
          g(q, k) = s * gpk + c * gqk;
        }
      }
    }
  }

  std::vector<Scalar> sv(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) sv[static_cast<std::size_t>(i)] = std::sqrt(std::max(g(i, i), Scalar(0)));
  std::sort(sv.begin(), sv.end(), std::greater<Scalar>());
  return sv;
}

}  // namespace ccbm
