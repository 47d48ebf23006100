#pragma once

#include <functional>

#include "ccbm/block_system.hpp"
#include "ccbm/fem.hpp"
#include "ccbm/types.hpp"

namespace ccbm {

/// Measured Cauchy data on the outer boundary: nodal Neumann and Dirichlet
/// values at the gamma_m nodes in sorted node order. delta_prime is the
/// relative noise level used to produce the data, delta the resulting
/// absolute noise level in the domain norm (0 for exact data, filled once
/// the right-hand sides have been computed).
struct CauchyData {
  Vector neumann;
  Vector dirichlet;
  Scalar delta_prime = 0;
  Scalar delta = 0;
};

/// A pair of nodal coefficient vectors on the inner-boundary nodes (sorted
/// node order): the unknown Neumann/Dirichlet data, solver iterates, and
/// search directions all live here.
struct BoundaryPair {
  Vector neumann;
  Vector dirichlet;

  BoundaryPair() = default;
  BoundaryPair(Vector n, Vector d) : neumann(std::move(n)), dirichlet(std::move(d)) {}
  static BoundaryPair zero(Index size) {
    return {Vector::Zero(size), Vector::Zero(size)};
  }

  Index size() const { return neumann.size(); }

  BoundaryPair& operator+=(const BoundaryPair& o) {
    neumann += o.neumann;
    dirichlet += o.dirichlet;
    return *this;
  }
  BoundaryPair& operator-=(const BoundaryPair& o) {
    neumann -= o.neumann;
    dirichlet -= o.dirichlet;
    return *this;
  }
  BoundaryPair& operator*=(Scalar a) {
    neumann *= a;
    dirichlet *= a;
    return *this;
  }
  friend BoundaryPair operator+(BoundaryPair a, const BoundaryPair& b) { return a += b; }
  friend BoundaryPair operator-(BoundaryPair a, const BoundaryPair& b) { return a -= b; }
  friend BoundaryPair operator*(Scalar a, BoundaryPair p) { return p *= a; }
};

/// Right-hand side of the operator equation: solves the coupled block
/// system with the measured data imposed on the outer boundary and returns
/// the negated imaginary component as a nodal field over the domain.
Vector compute_rhs(const BlockFactor& factor, const FemSystem& fem, const CauchyData& data);

/// Forward operator: inner-boundary pair -> imaginary solution component.
Vector apply_forward(const BlockFactor& factor, const FemSystem& fem, const BoundaryPair& phi);

/// Adjoint of the forward operator with respect to the M and C_u inner
/// products: domain field -> inner-boundary pair. The Neumann slot carries
/// the imaginary component, the Dirichlet slot the real one.
BoundaryPair apply_adjoint(const BlockFactor& factor, const FemSystem& fem, const Vector& g);

/// Discrete L2 norms: sqrt(g^T M g) over the domain and the C_u-weighted
/// pair norm on the inner boundary.
Scalar norm_field(const FemSystem& fem, const Vector& g);
Scalar norm_pair(const FemSystem& fem, const BoundaryPair& phi);
Scalar dot_field(const FemSystem& fem, const Vector& a, const Vector& b);
Scalar dot_pair(const FemSystem& fem, const BoundaryPair& a, const BoundaryPair& b);

/// The operator bundle the iterative solvers run on. Bundling through
/// std::function keeps the solvers independent of the FEM realization and
/// lets tests substitute scaled or synthetic operators.
struct CauchyOps {
  Index pair_size = 0;
  std::function<Vector(const BoundaryPair&)> forward;
  std::function<BoundaryPair(const Vector&)> adjoint;
  std::function<Scalar(const Vector&)> field_norm;
  std::function<Scalar(const BoundaryPair&)> pair_norm;
  std::function<Scalar(const Vector&, const Vector&)> field_dot;
  std::function<Scalar(const BoundaryPair&, const BoundaryPair&)> pair_dot;
};

CauchyOps make_cauchy_ops(const BlockFactor& factor, const FemSystem& fem);

}  // namespace ccbm
