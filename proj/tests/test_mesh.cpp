#include <catch2/catch_amalgamated.hpp>

#include "fractura/mesh.hpp"

using namespace fractura;

TEST_CASE("rect_mesh: counts, tags, domain") {
  const Mesh mesh = rect_mesh(0, 0, 2, 1, 4, 2, {"bottom", "top"});
  CHECK(mesh.nodes().size() == 15);
  CHECK(mesh.triangles().size() == 16);
  CHECK(mesh.dirichlet_edges().size() == 8);
  CHECK(mesh.neumann_edges().size() == 4);
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t)
    CHECK(mesh.triangle_area(static_cast<int>(t)) > 0.0);
  CHECK(mesh.domain().diameter() == Catch::Approx(std::sqrt(5.0)));
  CHECK(mesh.node_on_dirichlet(mesh.find_node({0.5, 0.0})));
  CHECK_FALSE(mesh.node_on_dirichlet(mesh.find_node({0.0, 0.5})));
  CHECK(mesh.node_on_boundary(mesh.find_node({0.0, 0.5})));
  CHECK_FALSE(mesh.node_on_boundary(mesh.find_node({0.5, 0.5})));
}

TEST_CASE("crack graph marking follows segments and skips the boundary") {
  Mesh mesh = rect_mesh(0, 0, 2, 1, 8, 4, {"all"});
  const int added = mesh.add_crack_edges_on({{{0.0, 0.5}, {2.0, 0.5}}});
  CHECK(added == 8);
  for (const auto& e : mesh.crack_edges()) {
    CHECK(mesh.nodes()[static_cast<std::size_t>(e[0])].y == 0.5);
    CHECK(mesh.nodes()[static_cast<std::size_t>(e[1])].y == 0.5);
  }
  // The bottom side is boundary; nothing gets marked without the opt-in flag.
  CHECK(mesh.add_crack_edges_on({{{0.0, 0.0}, {2.0, 0.0}}}) == 0);

  Mesh open_mesh = rect_mesh(0, 0, 2, 1, 8, 4, {"all"}, /*allow_boundary_cracks=*/true);
  CHECK(open_mesh.add_crack_edges_on({{{0.0, 0.0}, {2.0, 0.0}}}) == 8);
}

TEST_CASE("mesh validation errors") {
  // Degenerate triangle.
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {}, {}), ValidationError);
  // Untagged boundary.
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}}, {}), ValidationError);
  // Crack edge not in the mesh.
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}}, {{0, 2}},
                       {{0, 5}}),
                  ValidationError);
  // Boundary crack edge without the flag.
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}}, {{0, 2}},
                       {{0, 1}}),
                  ValidationError);
  CHECK_NOTHROW(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}}, {{0, 2}}, {{0, 1}},
                     true));
}

TEST_CASE("mesh json round trip") {
  Mesh mesh = rect_mesh(0, 0, 1, 1, 3, 3, {"left"});
  mesh.add_crack_edges_on({{{0.0, 2.0 / 3.0}, {1.0, 2.0 / 3.0}}});
  const nlohmann::json j = mesh_to_json(mesh);
  const Mesh back = mesh_from_json(j);
  CHECK(back.nodes().size() == mesh.nodes().size());
  CHECK(back.triangles() == mesh.triangles());
  CHECK(back.crack_edges() == mesh.crack_edges());
  CHECK(back.dirichlet_edges() == mesh.dirichlet_edges());
}
