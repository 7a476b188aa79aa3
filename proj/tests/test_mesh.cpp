#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "glenn/mesh.hpp"

using namespace glenn;

namespace {

void check_invariants(const Mesh2D& m, double area) {
  for (std::size_t t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
  CHECK(m.total_area() == doctest::Approx(area).epsilon(1e-13));
  CHECK(static_cast<long>(m.num_vertices()) - static_cast<long>(m.num_edges()) +
            static_cast<long>(m.num_triangles()) ==
        1);

  const auto valence = m.edge_valence();
  for (int e = 0; e < static_cast<int>(m.num_edges()); ++e) {
    CHECK(m.edges()[e][0] < m.edges()[e][1]);
    CHECK(valence[e] == (m.is_boundary_edge(e) ? 1 : 2));
  }

  // Signs from the definition: +1 iff the local traversal runs low -> high.
  std::vector<int> sign_sum(m.num_edges(), 0);
  const int ne = static_cast<int>(m.num_edges());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int l = 0; l < 3; ++l) {
      const int a = tri[l];
      const int b = tri[(l + 1) % 3];
      const int e = m.triangle_edges()[t][l];
      CHECK(std::set<int>{a, b} == std::set<int>{m.edges()[e][0], m.edges()[e][1]});
      CHECK(m.triangle_edge_signs()[t][l] == (a < b ? 1 : -1));
      sign_sum[e] += m.triangle_edge_signs()[t][l];
    }
  }
  for (int e = 0; e < ne; ++e) {
    if (!m.is_boundary_edge(e)) CHECK(sign_sum[e] == 0);
  }
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("unit square counts") {
    for (int n : {1, 2, 3, 64}) {
      const Mesh2D m = generate_unit_square(n);
      const auto un = static_cast<std::size_t>(n);
      CHECK(m.num_vertices() == (un + 1) * (un + 1));
      CHECK(m.num_triangles() == 2 * un * un);
      CHECK(m.num_edges() == 3 * un * un + 2 * un);
      CHECK(m.boundary_edges().size() == 4 * un);
      CHECK(m.boundary_vertices().size() == 4 * un);
    }
    const Mesh2D m64 = generate_unit_square(64);
    CHECK(m64.num_vertices() == 4225);
    CHECK(m64.num_triangles() == 8192);
    CHECK(m64.num_edges() == 12416);
  }

  TEST_CASE("unit square invariants") {
    for (int n : {1, 2, 5, 8}) check_invariants(generate_unit_square(n), 1.0);
  }

  TEST_CASE("unit square diagonals run from (i, j) to (i + 1, j + 1)") {
    const Mesh2D m = generate_unit_square(3);
    const double h = 1.0 / 3.0;
    int diagonals = 0;
    for (const auto& e : m.edges()) {
      const Vec2 d = m.vertices()[e[1]] - m.vertices()[e[0]];
      if (std::abs(d.x()) > 1e-12 && std::abs(d.y()) > 1e-12) {
        CHECK(d.x() == doctest::Approx(d.y()));
        CHECK(std::abs(d.x()) == doctest::Approx(h));
        ++diagonals;
      }
    }
    CHECK(diagonals == 9);
  }

  TEST_CASE("unit square rejects n < 1") {
    CHECK_THROWS_AS(generate_unit_square(0), std::invalid_argument);
    CHECK_THROWS_AS(generate_unit_square(-3), std::invalid_argument);
  }

  TEST_CASE("L-shape counts and area") {
    const Mesh2D m2 = generate_l_shape(2);
    CHECK(m2.num_vertices() == 8);
    CHECK(m2.num_triangles() == 6);
    CHECK(m2.num_edges() == 13);
    CHECK(m2.total_area() == doctest::Approx(0.75).epsilon(1e-14));

    const Mesh2D m4 = generate_l_shape(4);
    CHECK(m4.num_vertices() == 21);
    CHECK(m4.num_triangles() == 24);
    CHECK(m4.num_edges() == 44);
    for (int n : {2, 4, 10}) {
      const Mesh2D m = generate_l_shape(n);
      CHECK(m.num_triangles() == static_cast<std::size_t>(3 * n * n / 2));
      check_invariants(m, 0.75);
    }
  }

  TEST_CASE("L-shape excludes the upper right quadrant") {
    const Mesh2D m = generate_l_shape(6);
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const auto& tri = m.triangles()[t];
      const Vec2 c = (m.vertices()[tri[0]] + m.vertices()[tri[1]] + m.vertices()[tri[2]]) / 3.0;
      CHECK_FALSE((c.x() > 0.5 && c.y() > 0.5));
    }
    // The re-entrant corner is a boundary vertex.
    bool found = false;
    for (int v = 0; v < static_cast<int>(m.num_vertices()); ++v) {
      if ((m.vertices()[v] - Vec2(0.5, 0.5)).norm() < 1e-14) {
        found = true;
        CHECK(m.is_boundary_vertex(v));
      }
    }
    CHECK(found);
  }

  TEST_CASE("L-shape rejects odd or small n") {
    CHECK_THROWS_AS(generate_l_shape(3), std::invalid_argument);
    CHECK_THROWS_AS(generate_l_shape(0), std::invalid_argument);
  }

  TEST_CASE("uniform refinement") {
    const Mesh2D coarse = generate_unit_square(1);
    const Mesh2D once = refine_uniform(coarse);
    const Mesh2D two = generate_unit_square(2);
    CHECK(once.num_vertices() == two.num_vertices());
    CHECK(once.num_edges() == two.num_edges());
    CHECK(once.num_triangles() == 4 * coarse.num_triangles());
    check_invariants(once, 1.0);

    // Same vertex set as the structured mesh.
    auto key = [](const Vec2& v) { return std::make_pair(std::lround(v.x() * 1e6), std::lround(v.y() * 1e6)); };
    std::set<std::pair<long, long>> a;
    std::set<std::pair<long, long>> b;
    for (const auto& v : once.vertices()) a.insert(key(v));
    for (const auto& v : two.vertices()) b.insert(key(v));
    CHECK(a == b);

    const Mesh2D twice = refine_uniform(once);
    const Mesh2D four = generate_unit_square(4);
    CHECK(twice.num_vertices() == four.num_vertices());
    CHECK(twice.num_edges() == four.num_edges());
    CHECK(twice.num_triangles() == four.num_triangles());
    CHECK(twice.total_area() == doctest::Approx(1.0).epsilon(1e-14));

    const Mesh2D l = refine_uniform(generate_l_shape(2));
    CHECK(l.num_triangles() == 24);
    check_invariants(l, 0.75);
  }

  TEST_CASE("refined children have a quarter of the parent area") {
    const Mesh2D m = generate_l_shape(4);
    const Mesh2D r = refine_uniform(m);
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(r.signed_area(4 * t + c) == doctest::Approx(m.signed_area(t) / 4.0).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("from_triangles validation") {
    std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
    CHECK_NOTHROW(Mesh2D::from_triangles(v, {{0, 1, 2}}));
    CHECK_THROWS_AS(Mesh2D::from_triangles(v, {{0, 2, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Mesh2D::from_triangles(v, {{0, 1, 3}}), std::invalid_argument);
  }

  TEST_CASE("mesh VTK dump") {
    const auto path = std::filesystem::temp_directory_path() / "glenn_test_mesh.vtk";
    write_mesh_vtk(generate_unit_square(2), path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("POINTS 9") != std::string::npos);
    CHECK(text.find("CELLS 8 32") != std::string::npos);
    CHECK(text.find("CELL_TYPES 8") != std::string::npos);
    std::filesystem::remove(path);
  }
}
