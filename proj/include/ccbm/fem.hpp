#pragma once

#include <vector>

#include "ccbm/mesh.hpp"
#include "ccbm/types.hpp"

namespace ccbm {

/// The five sparse matrices of the linear finite element discretization,
/// assembled once per (mesh, zeta) and immutable afterwards:
///   A   stiffness with diffusion tensor diag(1, zeta),
///   M   domain mass,
///   C   boundary mass on the whole boundary, C = C_m + C_u entrywise,
///   C_m boundary mass restricted to the outer circle,
///   C_u boundary mass restricted to the inner circle.
/// All are n x n in the full nodal index space; C_m/C_u have nonzeros only
/// at their boundary nodes.
struct FemSystem {
  SparseMatrix A, M, C, C_m, C_u;
  Scalar zeta = 1;
  int n = 0;
  std::vector<int> gamma_m_nodes;
  std::vector<int> gamma_u_nodes;
  // C_u compressed to the gamma_u index set; the Gram matrix of the
  // inner-boundary inner product.
  SparseMatrix C_u_block;
};

/// Exact P1 element matrices (no quadrature error): stiffness and mass for
/// the triangle (p0,p1,p2), and the boundary mass block for an edge of the
/// given length.
Matrix3 local_stiffness(const Vector2& p0, const Vector2& p1, const Vector2& p2, Scalar zeta);
Matrix3 local_mass(const Vector2& p0, const Vector2& p1, const Vector2& p2);
Matrix2 local_edge_mass(Scalar length);

/// Assembles the FemSystem for linear elements on the given mesh. zeta = 1
/// gives the isotropic Laplacian. Throws ParameterError naming the triangle
/// index if a degenerate (nonpositive-area) triangle is found.
FemSystem assemble(const Mesh& mesh, Scalar zeta = 1);

}  // namespace ccbm
