#include "glenn/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace glenn {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

Mesh2D Mesh2D::from_triangles(std::vector<Vec2> vertices,
                              std::vector<std::array<int, 3>> triangles) {
  Mesh2D m;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);
  const int nv = static_cast<int>(m.vertices_.size());

  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    for (int v : m.triangles_[t]) {
      if (v < 0 || v >= nv) {
        throw std::invalid_argument("triangle " + std::to_string(t) + " references vertex " +
                                    std::to_string(v) + " out of range");
      }
    }
    if (!(m.signed_area(t) > 0.0)) {
      throw std::invalid_argument("triangle " + std::to_string(t) +
                                  " has non-positive signed area");
    }
  }

  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(3 * m.triangles_.size());
  std::vector<int> valence;
  m.triangle_edges_.resize(m.triangles_.size());
  m.triangle_edge_signs_.resize(m.triangles_.size());
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    const auto& tri = m.triangles_[t];
    for (int l = 0; l < 3; ++l) {
      const int a = tri[l];
      const int b = tri[(l + 1) % 3];
      const int lo = std::min(a, b);
      const int hi = std::max(a, b);
      auto [it, inserted] = lookup.try_emplace(edge_key(lo, hi), static_cast<int>(m.edges_.size()));
      if (inserted) {
        m.edges_.push_back({lo, hi});
        valence.push_back(0);
      }
      ++valence[it->second];
      m.triangle_edges_[t][l] = it->second;
      m.triangle_edge_signs_[t][l] = a < b ? 1 : -1;
    }
  }

  m.vertex_on_boundary_.assign(m.vertices_.size(), 0);
  m.edge_on_boundary_.assign(m.edges_.size(), 0);
  for (std::size_t e = 0; e < m.edges_.size(); ++e) {
    if (valence[e] > 2) {
      throw std::invalid_argument("non-manifold edge " + std::to_string(e));
    }
    if (valence[e] == 1) {
      m.edge_on_boundary_[e] = 1;
      m.boundary_edges_.push_back(static_cast<int>(e));
      m.vertex_on_boundary_[m.edges_[e][0]] = 1;
      m.vertex_on_boundary_[m.edges_[e][1]] = 1;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (m.vertex_on_boundary_[v]) m.boundary_vertices_.push_back(v);
  }
  return m;
}

double Mesh2D::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Vec2 e1 = vertices_[tri[1]] - vertices_[tri[0]];
  const Vec2 e2 = vertices_[tri[2]] - vertices_[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double Mesh2D::total_area() const {
  double area = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) area += signed_area(t);
  return area;
}

std::vector<int> Mesh2D::edge_valence() const {
  std::vector<int> valence(edges_.size(), 0);
  for (const auto& te : triangle_edges_) {
    for (int e : te) ++valence[e];
  }
  return valence;
}

namespace {

// Keeps the cells (i, j) accepted by `keep` and renumbers the used vertices.
template <class Keep>
Mesh2D structured_mesh(int n, Keep keep) {
  const int stride = n + 1;
  std::vector<int> renumber(static_cast<std::size_t>(stride) * stride, -1);
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  auto vid = [&](int i, int j) {
    int& slot = renumber[static_cast<std::size_t>(j) * stride + i];
    if (slot < 0) {
      slot = static_cast<int>(vertices.size());
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
    return slot;
  };
  // Vertices are numbered row by row so the numbering is independent of
  // the cell traversal.
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const bool used = (i > 0 && j > 0 && keep(i - 1, j - 1)) || (i < n && j > 0 && keep(i, j - 1)) ||
                        (i > 0 && j < n && keep(i - 1, j)) || (i < n && j < n && keep(i, j));
      if (used) vid(i, j);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!keep(i, j)) continue;
      const int v00 = vid(i, j);
      const int v10 = vid(i + 1, j);
      const int v11 = vid(i + 1, j + 1);
      const int v01 = vid(i, j + 1);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  return Mesh2D::from_triangles(std::move(vertices), std::move(triangles));
}

}  // namespace

Mesh2D generate_unit_square(int n) {
  if (n < 1) throw std::invalid_argument("generate_unit_square: n must be >= 1");
  return structured_mesh(n, [](int, int) { return true; });
}

Mesh2D generate_l_shape(int n) {
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("generate_l_shape: n must be even and >= 2");
  }
  const int half = n / 2;
  return structured_mesh(n, [half](int i, int j) { return i < half || j < half; });
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  std::vector<Vec2> vertices = mesh.vertices();
  vertices.reserve(mesh.num_vertices() + mesh.num_edges());
  for (const auto& e : mesh.edges()) {
    vertices.push_back(0.5 * (mesh.vertices()[e[0]] + mesh.vertices()[e[1]]));
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles()[t];
    const auto& te = mesh.triangle_edges()[t];
    const int m01 = nv + te[0];
    const int m12 = nv + te[1];
    const int m20 = nv + te[2];
    triangles.push_back({v[0], m01, m20});
    triangles.push_back({m01, v[1], m12});
    triangles.push_back({m20, m12, v[2]});
    triangles.push_back({m01, m12, m20});
  }
  return Mesh2D::from_triangles(std::move(vertices), std::move(triangles));
}

void write_mesh_vtk(const Mesh2D& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "# vtk DataFile Version 3.0\nglenn mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace glenn
