#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ccbm/types.hpp"

namespace ccbm {

enum class BoundaryTag { gamma_m, gamma_u };

/// Triangulated annulus with the accessible (outer, gamma_m) and
/// inaccessible (inner, gamma_u) boundary circles tagged. Immutable after
/// construction; safe to share read-only across concurrent solver runs.
struct Mesh {
  std::vector<Vector2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> gamma_m_nodes;             // sorted, duplicate-free
  std::vector<int> gamma_u_nodes;             // sorted, duplicate-free
  std::vector<std::array<int, 2>> gamma_m_edges;
  std::vector<std::array<int, 2>> gamma_u_edges;
  Scalar h = 0;   // max edge length
  Scalar r1 = 0;  // inner radius
  Scalar r2 = 0;  // outer radius

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

/// Structured polar mesh of the annulus {r1 <= |x| <= r2}: n_r+1 concentric
/// circles of n_theta equally spaced nodes, every quad cell split along the
/// same diagonal. Node count n_theta*(n_r+1), triangle count 2*n_theta*n_r.
Mesh generate_annulus(Scalar r1, Scalar r2, int n_theta, int n_r);

const std::vector<int>& boundary_nodes(const Mesh& mesh, BoundaryTag tag);

Scalar triangle_signed_area(const Mesh& mesh, int triangle);

void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::string& path);

}  // namespace ccbm
