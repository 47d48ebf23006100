#include "ccbm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace ccbm {

namespace {

constexpr Scalar kPi = 3.14159265358979323846;

Scalar edge_length(const Mesh& mesh, int a, int b) {
  return (mesh.nodes[a] - mesh.nodes[b]).norm();
}

Scalar max_edge_length(const Mesh& mesh) {
  Scalar h = 0;
  for (const auto& t : mesh.triangles) {
    h = std::max(h, edge_length(mesh, t[0], t[1]));
    h = std::max(h, edge_length(mesh, t[1], t[2]));
    h = std::max(h, edge_length(mesh, t[2], t[0]));
  }
  return h;
}

// Boundary edges are the ones used by exactly one triangle. An edge is
// tagged when both endpoints carry the tag.
void derive_boundary_edges(Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      edge_use[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  const std::set<int> gm(mesh.gamma_m_nodes.begin(), mesh.gamma_m_nodes.end());
  const std::set<int> gu(mesh.gamma_u_nodes.begin(), mesh.gamma_u_nodes.end());
  mesh.gamma_m_edges.clear();
  mesh.gamma_u_edges.clear();
  for (const auto& [edge, count] : edge_use) {
    if (count != 1) continue;
    auto [a, b] = edge;
    if (gm.count(a) && gm.count(b)) {
      mesh.gamma_m_edges.push_back({a, b});
    } else if (gu.count(a) && gu.count(b)) {
      mesh.gamma_u_edges.push_back({a, b});
    } else {
      throw ParameterError("mesh: boundary edge (" + std::to_string(a) + "," +
                           std::to_string(b) + ") has inconsistent boundary tags");
    }
  }
}

Scalar boundary_mean_radius(const Mesh& mesh, const std::vector<int>& nodes) {
  Scalar sum = 0;
  for (int i : nodes) sum += mesh.nodes[i].norm();
  return nodes.empty() ? Scalar(0) : sum / static_cast<Scalar>(nodes.size());
}

}  // namespace

Scalar triangle_signed_area(const Mesh& mesh, int triangle) {
  const auto& t = mesh.triangles[triangle];
  const Vector2& a = mesh.nodes[t[0]];
  const Vector2& b = mesh.nodes[t[1]];
  const Vector2& c = mesh.nodes[t[2]];
  return Scalar(0.5) * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Mesh generate_annulus(Scalar r1, Scalar r2, int n_theta, int n_r) {
  if (!(r1 > 0) || !(r2 > r1)) {
    throw ParameterError("generate_annulus: radii must satisfy 0 < r1 < r2");
  }
  if (n_theta < 4 || n_r < 1) {
    throw ParameterError("generate_annulus: need n_theta >= 4 and n_r >= 1");
  }

  Mesh mesh;
  mesh.r1 = r1;
  mesh.r2 = r2;
  mesh.nodes.reserve(static_cast<std::size_t>(n_theta) * (n_r + 1));
  for (int ring = 0; ring <= n_r; ++ring) {
    const Scalar r = r1 + (r2 - r1) * static_cast<Scalar>(ring) / static_cast<Scalar>(n_r);
    for (int j = 0; j < n_theta; ++j) {
      const Scalar theta = 2 * kPi * static_cast<Scalar>(j) / static_cast<Scalar>(n_theta);
      mesh.nodes.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }

  // Quad cell between rings (ring, ring+1) at angular slot j:
  //   a---b  inner ring      split along the a-d diagonal everywhere;
  //   |  /|                  (a,d,b) and (a,c,d) are counterclockwise in
  //   c---d  outer ring      physical coordinates.
  auto id = [n_theta](int ring, int j) { return ring * n_theta + (j % n_theta); };
  mesh.triangles.reserve(static_cast<std::size_t>(2 * n_theta) * n_r);
  for (int ring = 0; ring < n_r; ++ring) {
    for (int j = 0; j < n_theta; ++j) {
      const int a = id(ring, j);
      const int b = id(ring, j + 1);
      const int c = id(ring + 1, j);
      const int d = id(ring + 1, j + 1);
      mesh.triangles.push_back({a, d, b});
      mesh.triangles.push_back({a, c, d});
    }
  }

  mesh.gamma_u_nodes.resize(n_theta);
  mesh.gamma_m_nodes.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    mesh.gamma_u_nodes[j] = id(0, j);
    mesh.gamma_m_nodes[j] = id(n_r, j);
  }

  derive_boundary_edges(mesh);
  mesh.h = max_edge_length(mesh);
  return mesh;
}

const std::vector<int>& boundary_nodes(const Mesh& mesh, BoundaryTag tag) {
  return tag == BoundaryTag::gamma_m ? mesh.gamma_m_nodes : mesh.gamma_u_nodes;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << mesh.node_count() << ' ' << mesh.triangle_count() << '\n';
  for (const auto& p : mesh.nodes) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "gamma_m:";
  for (int i : mesh.gamma_m_nodes) out << ' ' << i;
  out << '\n' << "gamma_u:";
  for (int i : mesh.gamma_u_nodes) out << ' ' << i;
  out << '\n';
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("write_mesh: cannot open " + path);
  write_mesh(mesh, out);
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  int n_nodes = 0, n_triangles = 0;
  if (!(in >> n_nodes >> n_triangles) || n_nodes <= 0 || n_triangles <= 0) {
    throw ParameterError("read_mesh: malformed header");
  }
  mesh.nodes.resize(n_nodes);
  for (auto& p : mesh.nodes) {
    if (!(in >> p.x() >> p.y())) throw ParameterError("read_mesh: truncated node list");
  }
  mesh.triangles.resize(n_triangles);
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    auto& t = mesh.triangles[k];
    if (!(in >> t[0] >> t[1] >> t[2])) throw ParameterError("read_mesh: truncated triangle list");
    for (int v : t) {
      if (v < 0 || v >= n_nodes) {
        throw ParameterError("read_mesh: triangle " + std::to_string(k) +
                             " references node " + std::to_string(v));
      }
    }
  }
  auto read_tag_line = [&in](const std::string& label) {
    std::string line;
    while (std::getline(in, line) && line.empty()) {
    }
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head != label) throw ParameterError("read_mesh: expected '" + label + "' line");
    std::vector<int> ids;
    for (int i; ls >> i;) ids.push_back(i);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  };
  mesh.gamma_m_nodes = read_tag_line("gamma_m:");
  mesh.gamma_u_nodes = read_tag_line("gamma_u:");

  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    if (!(triangle_signed_area(mesh, static_cast<int>(k)) > 0)) {
      throw ParameterError("read_mesh: triangle " + std::to_string(k) +
                           " has nonpositive area");
    }
  }
  derive_boundary_edges(mesh);

  // every tagged node must sit on a boundary edge of its own tag, otherwise
  // the boundary mass matrices lose definiteness on the tagged index set
  auto check_tag_cover = [](const std::vector<int>& nodes,
                            const std::vector<std::array<int, 2>>& edges, const char* tag) {
    std::set<int> on_edges;
    for (const auto& e : edges) on_edges.insert(e.begin(), e.end());
    for (int i : nodes) {
      if (!on_edges.count(i)) {
        throw ParameterError("read_mesh: node " + std::to_string(i) + " is tagged " + tag +
                             " but lies on no " + tag + " boundary edge");
      }
    }
  };
  check_tag_cover(mesh.gamma_m_nodes, mesh.gamma_m_edges, "gamma_m");
  check_tag_cover(mesh.gamma_u_nodes, mesh.gamma_u_edges, "gamma_u");
  mesh.h = max_edge_length(mesh);
  mesh.r1 = boundary_mean_radius(mesh, mesh.gamma_u_nodes);
  mesh.r2 = boundary_mean_radius(mesh, mesh.gamma_m_nodes);
  return mesh;
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("read_mesh: cannot open " + path);
  return read_mesh(in);
}

}  // namespace ccbm
