#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mixedfem/coefficients.hpp"

using namespace mixedfem;

namespace {

Mesh unit_square(int sub0 = 0, int sub1 = 0) {
  return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                    {{{0, 1, 2}}, {{0, 2, 3}}}, {sub0, sub1});
}

}  // namespace

TEST_CASE("harmonic average formula") {
  CHECK(harmonic_average(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(harmonic_average(2, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(harmonic_average(1e6, 1) ==
        doctest::Approx(1e6 / (1e6 + 1)).epsilon(1e-15));
  CHECK(harmonic_average(3, 7) == doctest::Approx(harmonic_average(7, 3)));
  CHECK_THROWS_AS(harmonic_average(0, 1), NonPositiveCoefficient);
  CHECK_THROWS_AS(harmonic_average(1, -2), NonPositiveCoefficient);
}

TEST_CASE("per-edge values: single subdomain") {
  Mesh m = unit_square();
  CoefficientField c = build_coefficient(m, {{0, 3.0}});
  for (int i = 0; i < m.n_edges(); ++i) {
    const double expected =
        m.edges[i].cls == EdgeClass::Dirichlet ? 3.0 : 1.5;
    CHECK(c.alpha_harmonic_by_edge[i] == doctest::Approx(expected));
  }
}

TEST_CASE("checkerboard interface edge value R/(1+R)") {
  const double R = 1e3;
  Mesh m = unit_square(0, 1);
  CoefficientField c = build_coefficient(m, {{0, 1.0}, {1, R}});
  for (int i = 0; i < m.n_edges(); ++i)
    if (m.edges[i].interface)
      CHECK(c.alpha_harmonic_by_edge[i] ==
            doctest::Approx(R / (1.0 + R)).epsilon(1e-15));
}

TEST_CASE("bounds and reciprocal identity for random draws") {
  Mesh m = unit_square(0, 1);
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> expo(-6.0, 6.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double a0 = std::pow(10.0, expo(rng));
    const double a1 = std::pow(10.0, expo(rng));
    CoefficientField c = build_coefficient(m, {{0, a0}, {1, a1}});
    for (int i = 0; i < m.n_edges(); ++i) {
      const Edge& e = m.edges[i];
      const double ah = c.alpha_harmonic_by_edge[i];
      if (e.cls == EdgeClass::Dirichlet) continue;
      const double ap = c.alpha_by_triangle[e.tri[0]];
      const double am = c.alpha_by_triangle[e.tri[1]];
      CHECK(ah >= 0.5 * std::min(ap, am) * (1 - 1e-14));
      CHECK(ah <= std::min(ap, am) * (1 + 1e-14));
      CHECK(1.0 / ah ==
            doctest::Approx(1.0 / ap + 1.0 / am).epsilon(1e-14));
    }
  }
}

TEST_CASE("missing subdomain is reported") {
  Mesh m = unit_square(0, 1);
  CHECK_THROWS_AS(build_coefficient(m, {{0, 1.0}}), MissingSubdomain);
  CHECK_THROWS_AS(build_coefficient(m, {{0, 1.0}, {1, 0.0}}),
                  NonPositiveCoefficient);
}
