#include "ccbm/fem.hpp"

#include <string>
#include <unordered_map>

namespace ccbm {

Matrix3 local_stiffness(const Vector2& p0, const Vector2& p1, const Vector2& p2, Scalar zeta) {
  const Scalar area2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
  // gradients of the barycentric basis, scaled by 2*area
  const Scalar bx[3] = {p1.y() - p2.y(), p2.y() - p0.y(), p0.y() - p1.y()};
  const Scalar by[3] = {p2.x() - p1.x(), p0.x() - p2.x(), p1.x() - p0.x()};
  Matrix3 k;
  const Scalar w = 1 / (2 * area2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      k(i, j) = w * (bx[i] * bx[j] + zeta * by[i] * by[j]);
    }
  }
  return k;
}

Matrix3 local_mass(const Vector2& p0, const Vector2& p1, const Vector2& p2) {
  const Scalar area = Scalar(0.5) * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                                     (p2.x() - p0.x()) * (p1.y() - p0.y()));
  Matrix3 m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  m *= area / 12;
  return m;
}

Matrix2 local_edge_mass(Scalar length) {
  Matrix2 m;
  m << 2, 1, 1, 2;
  m *= length / 6;
  return m;
}

namespace {

SparseMatrix from_triplets(int n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void add_edge_terms(const Mesh& mesh, const std::vector<std::array<int, 2>>& edges,
                    std::vector<Triplet>& out) {
  for (const auto& e : edges) {
    const Scalar len = (mesh.nodes[e[0]] - mesh.nodes[e[1]]).norm();
    const Matrix2 m = local_edge_mass(len);
    const int idx[2] = {e[0], e[1]};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        out.emplace_back(idx[i], idx[j], m(i, j));
      }
    }
  }
}

}  // namespace

FemSystem assemble(const Mesh& mesh, Scalar zeta) {
  if (!(zeta > 0)) throw ParameterError("assemble: zeta must be positive");
  const int n = mesh.node_count();

  std::vector<Triplet> ta, tm;
  ta.reserve(9 * mesh.triangles.size());
  tm.reserve(9 * mesh.triangles.size());
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    if (!(triangle_signed_area(mesh, static_cast<int>(k)) > 0)) {
      throw ParameterError("assemble: triangle " + std::to_string(k) +
                           " has nonpositive area");
    }
    const Matrix3 ke = local_stiffness(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], zeta);
    const Matrix3 me = local_mass(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ta.emplace_back(t[i], t[j], ke(i, j));
        tm.emplace_back(t[i], t[j], me(i, j));
      }
    }
  }

  std::vector<Triplet> tcm, tcu;
  add_edge_terms(mesh, mesh.gamma_m_edges, tcm);
  add_edge_terms(mesh, mesh.gamma_u_edges, tcu);

  FemSystem fem;
  fem.zeta = zeta;
  fem.n = n;
  fem.gamma_m_nodes = mesh.gamma_m_nodes;
  fem.gamma_u_nodes = mesh.gamma_u_nodes;
  fem.A = from_triplets(n, ta);
  fem.M = from_triplets(n, tm);
  fem.C_m = from_triplets(n, tcm);
  fem.C_u = from_triplets(n, tcu);
  fem.C = fem.C_m + fem.C_u;
  fem.C.makeCompressed();

  // gamma_u block of C_u in boundary-local indexing
  const int m = static_cast<int>(fem.gamma_u_nodes.size());
  std::unordered_map<int, int> local;
  local.reserve(fem.gamma_u_nodes.size());
  for (int i = 0; i < m; ++i) local[fem.gamma_u_nodes[i]] = i;
  std::vector<Triplet> tb;
  for (int col = 0; col < fem.C_u.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(fem.C_u, col); it; ++it) {
      auto r = local.find(static_cast<int>(it.row()));
      auto c = local.find(col);
      if (r != local.end() && c != local.end()) {
        tb.emplace_back(r->second, c->second, it.value());
      }
    }
  }
  fem.C_u_block.resize(m, m);
  fem.C_u_block.setFromTriplets(tb.begin(), tb.end());
  fem.C_u_block.makeCompressed();
  return fem;
}

}  // namespace ccbm
