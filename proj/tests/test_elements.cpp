#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mixedfem/elements.hpp"

using namespace mixedfem;

namespace {

TriangleGeometry reference_geometry() {
  TriangleGeometry g;
  g.v = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  return g;
}

TriangleGeometry random_geometry(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TriangleGeometry g;
  while (true) {
    for (int i = 0; i < 3; ++i) g.v[i] = Vec2(u(rng), u(rng));
    if (g.det() > 0.3) break;  // well-shaped, ccw
  }
  return g;
}

// integral of x^a y^b over the reference triangle
double monomial_integral(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

const std::vector<SpaceDescriptor> kFluxSpaces{
    {Family::RT, 0}, {Family::RT, 1}, {Family::BDM, 1}, {Family::BDM, 2}};

}  // namespace

TEST_CASE("quadrature order 1 is the centroid rule") {
  QuadratureRule r = quadrature(1);
  REQUIRE(r.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.points[0][0] == doctest::Approx(1.0 / 3));
  CHECK(r.points[0][1] == doctest::Approx(1.0 / 3));
}

TEST_CASE("quadrature order 2 integrates quadratics exactly") {
  QuadratureRule r = quadrature(2);
  double xx = 0, xy = 0, yy = 0;
  for (int q = 0; q < r.size(); ++q) {
    const Vec2 p = r.ref_point(q);
    xx += r.weights[q] * p.x() * p.x();
    xy += r.weights[q] * p.x() * p.y();
    yy += r.weights[q] * p.y() * p.y();
  }
  CHECK(xx == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(xy == doctest::Approx(1.0 / 24).epsilon(1e-14));
  CHECK(yy == doctest::Approx(1.0 / 12).epsilon(1e-14));
}

TEST_CASE("quadrature is exact up to its order and weights sum to 1/2") {
  for (int order = 1; order <= 20; ++order) {
    QuadratureRule r = quadrature(order);
    double wsum = 0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-13));
    for (int a = 0; a + 0 <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) {
        double s = 0;
        for (int q = 0; q < r.size(); ++q) {
          const Vec2 p = r.ref_point(q);
          s += r.weights[q] * std::pow(p.x(), a) * std::pow(p.y(), b);
        }
        CHECK(s == doctest::Approx(monomial_integral(a, b)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(quadrature(0), UnsupportedOrder);
  CHECK_THROWS_AS(quadrature(21), UnsupportedOrder);
}

TEST_CASE("scalar basis starts with the constant and spans P_k") {
  ScalarBasis b0 = scalar_basis(0, Vec2(0.3, 0.2));
  REQUIRE(b0.values.size() == 1);
  CHECK(b0.values[0] == 1.0);
  CHECK(b0.gradients(0, 0) == 0.0);
  CHECK(b0.gradients(0, 1) == 0.0);

  // gradients match a central finite difference
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.4);
  for (int k = 1; k <= 3; ++k) {
    const Vec2 p(u(rng), u(rng));
    const double h = 1e-6;
    ScalarBasis b = scalar_basis(k, p);
    ScalarBasis bx0 = scalar_basis(k, p - Vec2(h, 0));
    ScalarBasis bx1 = scalar_basis(k, p + Vec2(h, 0));
    ScalarBasis by0 = scalar_basis(k, p - Vec2(0, h));
    ScalarBasis by1 = scalar_basis(k, p + Vec2(0, h));
    for (int i = 0; i < b.values.size(); ++i) {
      CHECK(b.gradients(i, 0) ==
            doctest::Approx((bx1.values[i] - bx0.values[i]) / (2 * h)).epsilon(1e-6));
      CHECK(b.gradients(i, 1) ==
            doctest::Approx((by1.values[i] - by0.values[i]) / (2 * h)).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(scalar_basis(4, Vec2(0, 0)), UnsupportedDegree);
}

TEST_CASE("P_1 span has the Lagrange property at the vertices") {
  // nodal basis from the hierarchical one via a Vandermonde solve
  const std::array<Vec2, 3> verts{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  Eigen::Matrix3d V;
  for (int i = 0; i < 3; ++i)
    V.row(i) = scalar_basis(1, verts[i]).values.transpose();
  const Eigen::Matrix3d C = V.inverse();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double nodal = scalar_basis(1, verts[i]).values.dot(C.col(j));
      CHECK(nodal == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
    }
}

TEST_CASE("P_2 Gram matrix is symmetric positive definite") {
  QuadratureRule r = quadrature(4);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(6, 6);
  for (int q = 0; q < r.size(); ++q) {
    ScalarBasis b = scalar_basis(2, r.ref_point(q));
    G += r.weights[q] * b.values * b.values.transpose();
  }
  CHECK((G - G.transpose()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() < 1e5);
}

TEST_CASE("RT0 basis has unit moment on its own edge") {
  std::mt19937 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const TriangleGeometry g =
        rep == 0 ? reference_geometry() : random_geometry(rng);
    const ElementFluxBasis basis({Family::RT, 0}, g);
    REQUIRE(basis.size() == 3);
    for (int e = 0; e < 3; ++e) {
      for (int i = 0; i < 3; ++i) {
        // edge moment of basis i on edge e via Gauss quadrature
        const GaussRule1D gl = gauss_legendre(4);
        double mom = 0;
        const Vec2 n = g.edge_normal(e);
        (void)n;
        for (size_t q = 0; q < gl.points.size(); ++q)
          mom += gl.weights[q] *
                 basis.edge_normal_values(e, gl.points[q])[i] *
                 g.edge_length(e);
        CHECK(mom == doctest::Approx(e == i ? 1.0 : 0.0).epsilon(1e-12));
        // normal component constant along the edge
        const double n0 = basis.edge_normal_values(e, 0.21)[i];
        const double n1 = basis.edge_normal_values(e, 0.78)[i];
        CHECK(n0 == doctest::Approx(n1).epsilon(1e-12));
      }
    }
    // RT0 divergences are constant
    const FluxBasisEval at_a = basis.eval(Vec2(0.2, 0.3));
    const FluxBasisEval at_b = basis.eval(Vec2(0.6, 0.1));
    for (int i = 0; i < 3; ++i)
      CHECK(at_a.divergences[i] == doctest::Approx(at_b.divergences[i]).epsilon(1e-12));
  }
}

TEST_CASE("DOF functionals applied to their own basis give the identity") {
  std::mt19937 rng(11);
  for (const SpaceDescriptor& desc : kFluxSpaces) {
    for (int rep = 0; rep < 3; ++rep) {
      const TriangleGeometry g =
          rep == 0 ? reference_geometry() : random_geometry(rng);
      const ElementFluxBasis basis(desc, g);
      const int n = basis.size();
      Eigen::MatrixXd M(n, n);
      for (int j = 0; j < n; ++j) {
        VectorField fj = [&, j](const Vec2& x) {
          const FluxBasisEval ev = basis.eval(g.unmap(x));
          return Vec2(ev.values(j, 0), ev.values(j, 1));
        };
        M.col(j) = dof_functionals(desc, g, fj);
      }
      CHECK((M - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("BDM1 reproduces constants and has linear divergences") {
  std::mt19937 rng(5);
  const TriangleGeometry g = random_geometry(rng);
  const SpaceDescriptor desc{Family::BDM, 1};
  const ElementFluxBasis basis(desc, g);
  REQUIRE(basis.size() == 6);

  // interpolate the constant field (1,0): solve the duality system
  const Eigen::VectorXd moments =
      dof_functionals(desc, g, [](const Vec2&) { return Vec2(1.0, 0.0); });
  std::uniform_real_distribution<double> u(0.05, 0.25);
  for (int rep = 0; rep < 10; ++rep) {
    const Vec2 rp(u(rng), u(rng));
    const FluxBasisEval ev = basis.eval(rp);
    const Vec2 val(ev.values.col(0).dot(moments), ev.values.col(1).dot(moments));
    CHECK((val - Vec2(1.0, 0.0)).norm() < 1e-12);
  }

  // each divergence is linear: its second differences vanish
  auto div_at = [&](double x, double y, int i) {
    return basis.eval(Vec2(x, y)).divergences[i];
  };
  for (int i = 0; i < 6; ++i) {
    const double d = 0.1;
    const double second_x =
        div_at(0.3 + d, 0.2, i) - 2 * div_at(0.3, 0.2, i) + div_at(0.3 - d, 0.2, i);
    const double second_y =
        div_at(0.2, 0.3 + d, i) - 2 * div_at(0.2, 0.3, i) + div_at(0.2, 0.3 - d, i);
    const double mixed = div_at(0.3 + d, 0.2 + d, i) - div_at(0.3 + d, 0.2, i) -
                         div_at(0.3, 0.2 + d, i) + div_at(0.3, 0.2, i);
    CHECK(std::abs(second_x) < 1e-10);
    CHECK(std::abs(second_y) < 1e-10);
    CHECK(std::abs(mixed) < 1e-10);
  }
}

TEST_CASE("divergence of interpolated polynomial fields is exact") {
  // (x^2, xy) lies in RT1 and BDM2 with divergence 3x: evaluating the
  // interpolant's divergence checks the Piola divergence scaling.
  std::mt19937 rng(17);
  for (const SpaceDescriptor& desc :
       {SpaceDescriptor{Family::RT, 1}, SpaceDescriptor{Family::BDM, 2}}) {
    for (int rep = 0; rep < 4; ++rep) {
      const TriangleGeometry g = random_geometry(rng);
      const ElementFluxBasis basis(desc, g);
      const Eigen::VectorXd moments = dof_functionals(
          desc, g, [](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); });
      std::uniform_real_distribution<double> u(0.1, 0.3);
      for (int s = 0; s < 5; ++s) {
        const Vec2 rp(u(rng), u(rng));
        const Vec2 phys = g.map(rp);
        const FluxBasisEval ev = basis.eval(rp);
        const Vec2 val(ev.values.col(0).dot(moments),
                       ev.values.col(1).dot(moments));
        CHECK((val - Vec2(phys.x() * phys.x(), phys.x() * phys.y())).norm() <
              1e-11);
        CHECK(ev.divergences.dot(moments) ==
              doctest::Approx(3.0 * phys.x()).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("RT0 is contained in BDM1") {
  std::mt19937 rng(23);
  const TriangleGeometry g = random_geometry(rng);
  const ElementFluxBasis rt0({Family::RT, 0}, g);
  const ElementFluxBasis bdm1({Family::BDM, 1}, g);
  std::uniform_real_distribution<double> u(0.05, 0.3);
  for (int i = 0; i < 3; ++i) {
    VectorField fi = [&, i](const Vec2& x) {
      const FluxBasisEval ev = rt0.eval(g.unmap(x));
      return Vec2(ev.values(i, 0), ev.values(i, 1));
    };
    const Eigen::VectorXd moments = dof_functionals({Family::BDM, 1}, g, fi);
    for (int s = 0; s < 8; ++s) {
      const Vec2 rp(u(rng), u(rng));
      const FluxBasisEval ev = bdm1.eval(rp);
      const Vec2 val(ev.values.col(0).dot(moments),
                     ev.values.col(1).dot(moments));
      const FluxBasisEval rt = rt0.eval(rp);
      CHECK((val - Vec2(rt.values(i, 0), rt.values(i, 1))).norm() < 1e-12);
    }
  }
}

TEST_CASE("RT0 moments of (1,0) on the reference triangle") {
  const TriangleGeometry g = reference_geometry();
  const Eigen::VectorXd m =
      dof_functionals({Family::RT, 0}, g, [](const Vec2&) { return Vec2(1, 0); });
  REQUIRE(m.size() == 3);
  // signed edge integrals of n_x: hypotenuse 1, x=0 side -1, y=0 side 0
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m[1] == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(m[2] == doctest::Approx(0.0).epsilon(1e-13));

  const Eigen::VectorXd z =
      dof_functionals({Family::RT, 1}, g, [](const Vec2&) { return Vec2(0, 0); });
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unsupported degrees are rejected") {
  CHECK_THROWS_AS(SpaceDescriptor({Family::RT, 2}).validate(), UnsupportedDegree);
  CHECK_THROWS_AS(SpaceDescriptor({Family::BDM, 0}).validate(), UnsupportedDegree);
  CHECK_THROWS_AS(SpaceDescriptor({Family::BDM, 3}).validate(), UnsupportedDegree);
  CHECK(SpaceDescriptor({Family::RT, 0}).local_dimension() == 3);
  CHECK(SpaceDescriptor({Family::RT, 1}).local_dimension() == 8);
  CHECK(SpaceDescriptor({Family::BDM, 1}).local_dimension() == 6);
  CHECK(SpaceDescriptor({Family::BDM, 2}).local_dimension() == 12);
  CHECK(SpaceDescriptor({Family::DiscontinuousScalar, 3}).local_dimension() == 10);
}

TEST_CASE("dyadic integration matches plain quadrature for smooth integrands") {
  auto f = [](const Vec2& x) { return std::sin(3 * x.x()) * x.y(); };
  const Vec2 a(0, 0), b(1, 0), c(0.2, 0.9);
  const double plain = integrate_triangle(f, a, b, c, 15);
  const double dy = integrate_triangle_dyadic(f, a, b, c, a, 5, 15);
  CHECK(dy == doctest::Approx(plain).epsilon(1e-12));
  // and resolves an integrable singularity at a vertex
  auto s = [](const Vec2& x) { return std::pow(x.norm(), -0.5); };
  const double deep = integrate_triangle_dyadic(s, a, b, c, a, 24, 12);
  const double mid = integrate_triangle_dyadic(s, a, b, c, a, 16, 12);
  CHECK(mid == doctest::Approx(deep).epsilon(1e-4));
}
