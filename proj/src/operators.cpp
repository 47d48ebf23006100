#include "ccbm/operators.hpp"

#include <cmath>
#include <string>

namespace ccbm {

namespace {

Vector embed(const std::vector<int>& nodes, const Vector& values, int n) {
  Vector out = Vector::Zero(n);
  for (std::size_t i = 0; i < nodes.size(); ++i) out[nodes[i]] = values[static_cast<Index>(i)];
  return out;
}

Vector extract(const std::vector<int>& nodes, const Vector& field) {
  Vector out(static_cast<Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) out[static_cast<Index>(i)] = field[nodes[i]];
  return out;
}

void check_pair(const FemSystem& fem, const BoundaryPair& phi, const char* where) {
  const auto m = static_cast<Index>(fem.gamma_u_nodes.size());
  if (phi.neumann.size() != m || phi.dirichlet.size() != m) {
    throw ParameterError(std::string(where) + ": boundary pair length does not match gamma_u");
  }
}

}  // namespace

Vector compute_rhs(const BlockFactor& factor, const FemSystem& fem, const CauchyData& data) {
  const auto m = static_cast<Index>(fem.gamma_m_nodes.size());
  if (data.neumann.size() != m || data.dirichlet.size() != m) {
    throw ParameterError("compute_rhs: data length does not match gamma_m");
  }
  const Vector rhs_r = fem.C_m * embed(fem.gamma_m_nodes, data.neumann, fem.n);
  const Vector rhs_i = fem.C_m * embed(fem.gamma_m_nodes, data.dirichlet, fem.n);
  auto [u1, u2] = factor.solve(rhs_r, rhs_i);
  return -u2;
}

Vector apply_forward(const BlockFactor& factor, const FemSystem& fem, const BoundaryPair& phi) {
  check_pair(fem, phi, "apply_forward");
  const Vector rhs_r = fem.C_u * embed(fem.gamma_u_nodes, phi.neumann, fem.n);
  const Vector rhs_i = fem.C_u * embed(fem.gamma_u_nodes, phi.dirichlet, fem.n);
  auto [u1, u2] = factor.solve(rhs_r, rhs_i);
  return u2;
}

BoundaryPair apply_adjoint(const BlockFactor& factor, const FemSystem& fem, const Vector& g) {
  if (g.size() != fem.n) {
    throw ParameterError("apply_adjoint: field length does not match node count");
  }
  auto [w1, w2] = factor.solve(fem.M * g, Vector::Zero(fem.n));
  return {extract(fem.gamma_u_nodes, w2), extract(fem.gamma_u_nodes, w1)};
}

Scalar dot_field(const FemSystem& fem, const Vector& a, const Vector& b) {
  if (a.size() != fem.n || b.size() != fem.n) {
    throw ParameterError("dot_field: length does not match node count");
  }
  return a.dot(fem.M * b);
}

Scalar norm_field(const FemSystem& fem, const Vector& g) {
  return std::sqrt(std::max(dot_field(fem, g, g), Scalar(0)));
}

Scalar dot_pair(const FemSystem& fem, const BoundaryPair& a, const BoundaryPair& b) {
  check_pair(fem, a, "dot_pair");
  check_pair(fem, b, "dot_pair");
  return a.neumann.dot(fem.C_u_block * b.neumann) + a.dirichlet.dot(fem.C_u_block * b.dirichlet);
}

Scalar norm_pair(const FemSystem& fem, const BoundaryPair& phi) {
  return std::sqrt(std::max(dot_pair(fem, phi, phi), Scalar(0)));
}

CauchyOps make_cauchy_ops(const BlockFactor& factor, const FemSystem& fem) {
  CauchyOps ops;
  ops.pair_size = static_cast<Index>(fem.gamma_u_nodes.size());
  ops.forward = [&factor, &fem](const BoundaryPair& p) { return apply_forward(factor, fem, p); };
  ops.adjoint = [&factor, &fem](const Vector& g) { return apply_adjoint(factor, fem, g); };
  ops.field_norm = [&fem](const Vector& g) { return norm_field(fem, g); };
  ops.pair_norm = [&fem](const BoundaryPair& p) { return norm_pair(fem, p); };
  ops.field_dot = [&fem](const Vector& a, const Vector& b) { return dot_field(fem, a, b); };
  ops.pair_dot = [&fem](const BoundaryPair& a, const BoundaryPair& b) {
    return dot_pair(fem, a, b);
  };
  return ops;
}

}  // namespace ccbm
