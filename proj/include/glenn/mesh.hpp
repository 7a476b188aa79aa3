#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace glenn {

using Vec2 = Eigen::Vector2d;

/// Conforming triangulation with globally oriented edges.
///
/// Edges are stored as (low, high) vertex pairs; that order fixes the
/// tangential direction used by the edge elements. Local edge `l` of a
/// triangle joins local vertices (l, l+1 mod 3), and `triangle_edge_signs`
/// is +1 when that local traversal runs from the lower to the higher global
/// vertex index. A mesh is immutable once built.
class Mesh2D {
 public:
  /// Builds all derived connectivity and checks the invariants
  /// (positive areas, conformity). Throws std::invalid_argument otherwise.
  static Mesh2D from_triangles(std::vector<Vec2> vertices,
                               std::vector<std::array<int, 3>> triangles);

  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_triangles() const { return triangles_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }

  [[nodiscard]] const std::vector<Vec2>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangle_edge_signs() const {
    return triangle_edge_signs_;
  }
  [[nodiscard]] const std::vector<int>& boundary_edges() const { return boundary_edges_; }
  [[nodiscard]] const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }
  [[nodiscard]] bool is_boundary_vertex(int v) const { return vertex_on_boundary_[v]; }
  [[nodiscard]] bool is_boundary_edge(int e) const { return edge_on_boundary_[e]; }

  [[nodiscard]] double signed_area(std::size_t t) const;
  [[nodiscard]] double total_area() const;
  /// Number of triangles adjacent to each edge (1 on the boundary, 2 inside).
  [[nodiscard]] std::vector<int> edge_valence() const;

 private:
  Mesh2D() = default;

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 3>> triangle_edge_signs_;
  std::vector<int> boundary_edges_;
  std::vector<int> boundary_vertices_;
  std::vector<char> vertex_on_boundary_;
  std::vector<char> edge_on_boundary_;
};

/// Uniform mesh of (0,1)^2 with n cells per side, every cell cut along the
/// diagonal from (i/n, j/n) to ((i+1)/n, (j+1)/n).
Mesh2D generate_unit_square(int n);

/// (0,1)^2 minus the closed quadrant [1/2,1]^2. `n` must be even so the
/// re-entrant corner is a mesh vertex.
Mesh2D generate_l_shape(int n);

/// Red refinement: every triangle split into four congruent children.
Mesh2D refine_uniform(const Mesh2D& mesh);

/// Legacy-VTK ASCII dump of the triangulation.
void write_mesh_vtk(const Mesh2D& mesh, const std::filesystem::path& path);

}  // namespace glenn
