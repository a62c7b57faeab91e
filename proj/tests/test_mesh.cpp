#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mixedfem/mesh.hpp"

using namespace mixedfem;

namespace {

Mesh unit_square(int sub0 = 0, int sub1 = 0) {
  return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                    {{{0, 1, 2}}, {{0, 2, 3}}}, {sub0, sub1});
}

}  // namespace

TEST_CASE("two-triangle square topology") {
  Mesh m = unit_square();
  CHECK(m.n_vertices() == 4);
  CHECK(m.n_triangles() == 2);
  CHECK(m.n_edges() == 5);
  int interior = 0, dirichlet = 0;
  for (const Edge& e : m.edges)
    (e.cls == EdgeClass::Interior ? interior : dirichlet)++;
  CHECK(interior == 1);
  CHECK(dirichlet == 4);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.boundary_polygon_area() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("interface along the diagonal is a full element edge") {
  Mesh m = unit_square(0, 1);
  int n_interface = 0;
  for (const Edge& e : m.edges)
    if (e.interface) {
      ++n_interface;
      CHECK(e.cls == EdgeClass::Interior);
    }
  CHECK(n_interface == 1);
}

TEST_CASE("edge shared by three triangles is rejected") {
  // three triangles around edge (0,1)
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {2, 0.5}};
  std::vector<std::array<int, 3>> t{{{0, 1, 2}}, {{0, 3, 1}}, {{0, 1, 4}}};
  CHECK_THROWS_AS(build_mesh(v, t, {0, 0, 0}), NonConformingInput);
}

TEST_CASE("degenerate triangles are rejected") {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(build_mesh(v, {{{0, 1, 2}}}, {0}), DegenerateTriangle);
  // clockwise (negative area)
  std::vector<Vec2> w{{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(build_mesh(w, {{{0, 2, 1}}}, {0}), DegenerateTriangle);
}

TEST_CASE("normals leave the lower-indexed triangle") {
  Mesh m = unit_square();
  for (const Edge& e : m.edges) {
    const int t0 = e.tri[0];
    // the normal points away from the centroid of tri[0]
    const Vec2 mid = 0.5 * (m.vertices[e.a] + m.vertices[e.b]);
    CHECK((mid - m.centroid(t0)).dot(e.normal) > 0.0);
    CHECK(e.normal.norm() == doctest::Approx(1.0));
  }
  for (int t = 0; t < m.n_triangles(); ++t)
    for (int e = 0; e < 3; ++e) {
      const Edge& ed = m.edges[m.triangle_to_edges[t][e]];
      const int sign = m.triangle_edge_sign[t][e];
      CHECK(sign == (ed.tri[0] == t ? 1 : -1));
    }
}

TEST_CASE("uniform refinement quarters triangles and halves h") {
  Mesh m = unit_square(0, 1);
  RefinementSpec spec;
  spec.mode = RefinementSpec::Mode::Uniform;
  spec.levels = 1;
  Mesh r = refine(m, spec);
  CHECK(r.n_triangles() == 8);
  CHECK(r.max_h() == doctest::Approx(0.5 * m.max_h()).epsilon(1e-14));
  CHECK(r.total_area() == doctest::Approx(1.0).epsilon(1e-13));

  spec.levels = 3;
  Mesh r3 = refine(m, spec);
  CHECK(r3.n_triangles() == 128);
  CHECK(r3.max_h() == doctest::Approx(m.max_h() / 8.0).epsilon(1e-14));

  // children inherit the parent subdomain
  int in0 = 0, in1 = 0;
  for (int t = 0; t < r3.n_triangles(); ++t)
    (r3.subdomain_id[t] == 0 ? in0 : in1)++;
  CHECK(in0 == 64);
  CHECK(in1 == 64);

  // similar triangles keep the shape-regularity ratio exactly
  CHECK(r3.shape_regularity() ==
        doctest::Approx(m.shape_regularity()).epsilon(1e-12));
}

TEST_CASE("graded bisection concentrates resolution at the center") {
  Mesh m = unit_square();
  RefinementSpec uni;
  uni.mode = RefinementSpec::Mode::Uniform;
  uni.levels = 2;
  Mesh u2 = refine(m, uni);

  RefinementSpec graded;
  graded.mode = RefinementSpec::Mode::GradedBisection;
  graded.center = Vec2(0, 0);
  graded.levels = 4;
  graded.grading_radius_factor = 0.5;
  Mesh g = refine(m, graded);

  CHECK(g.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  for (int t = 0; t < g.n_triangles(); ++t) CHECK(g.area(t) > 0.0);

  double min_h_center = 1e30;
  for (int t = 0; t < g.n_triangles(); ++t)
    if (g.distance_to_triangle(t, graded.center) <= 1e-12)
      min_h_center = std::min(min_h_center, g.h_K[t]);
  CHECK(min_h_center < 0.2 * u2.min_h());

  // comparable triangle counts (same order of magnitude)
  CHECK(g.n_triangles() < 10 * u2.n_triangles());

  // bisection keeps shape regularity bounded
  CHECK(g.shape_regularity() < 3.0 * m.shape_regularity());
}

TEST_CASE("mesh file round trip") {
  Mesh m = refine(unit_square(0, 1), {RefinementSpec::Mode::Uniform, {0, 0}, 2, 0.5});
  std::stringstream ss;
  write_mesh(m, ss);
  Mesh r = read_mesh(ss);
  REQUIRE(r.n_triangles() == m.n_triangles());
  REQUIRE(r.n_vertices() == m.n_vertices());
  for (int t = 0; t < m.n_triangles(); ++t) {
    CHECK(r.triangles[t] == m.triangles[t]);
    CHECK(r.subdomain_id[t] == m.subdomain_id[t]);
  }
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK((r.vertices[v] - m.vertices[v]).norm() == doctest::Approx(0.0));
}
