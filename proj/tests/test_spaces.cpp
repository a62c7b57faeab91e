#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mixedfem/spaces.hpp"

using namespace mixedfem;

namespace {

Mesh unit_square() {
  return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                    {{{0, 1, 2}}, {{0, 2, 3}}}, {0, 0});
}

Mesh refined_square(int levels) {
  RefinementSpec s;
  s.mode = RefinementSpec::Mode::Uniform;
  s.levels = levels;
  return refine(unit_square(), s);
}

double flux_l2_error(const Mesh& mesh, const FieldVector& fh,
                     const VectorField& exact, int order = 10) {
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(fh.dofmap->space, geom);
    const Eigen::VectorXd cf = local_coeffs(fh, t);
    const QuadratureRule rule = quadrature(order);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 rp = rule.ref_point(q);
      const FluxBasisEval ev = basis.eval(rp);
      const Vec2 val(ev.values.col(0).dot(cf), ev.values.col(1).dot(cf));
      total += rule.weights[q] * geom.det() *
               (val - exact(geom.map(rp))).squaredNorm();
    }
  }
  return std::sqrt(total);
}

}  // namespace

TEST_CASE("global DOF counts") {
  Mesh m = unit_square();
  CHECK(build_dofmap(m, {Family::RT, 0})->n_global == 5);
  CHECK(build_dofmap(m, {Family::BDM, 1})->n_global == 10);
  CHECK(build_dofmap(m, {Family::DiscontinuousScalar, 1})->n_global == 6);
  CHECK(build_dofmap(m, {Family::RT, 1})->n_global == 14);   // 2/edge + 2/tri
  CHECK(build_dofmap(m, {Family::BDM, 2})->n_global == 21);  // 3/edge + 3/tri
}

TEST_CASE("interpolation reproduces fields inside the space") {
  Mesh m = refined_square(1);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.1, 0.9);

  FieldVector c10 =
      interpolate_flux(m, {Family::RT, 0}, [](const Vec2&) { return Vec2(1, 0); });
  FieldVector cxy =
      interpolate_flux(m, {Family::RT, 0}, [](const Vec2& x) { return x; });
  for (int rep = 0; rep < 20; ++rep) {
    const Vec2 p(u(rng), u(rng));
    for (int t = 0; t < m.n_triangles(); ++t) {
      if (m.distance_to_triangle(t, p) > 0) continue;
      const Vec2 rp = element_geometry(m, t).unmap(p);
      CHECK((evaluate_flux(m, c10, t, rp) - Vec2(1, 0)).norm() < 1e-12);
      CHECK((evaluate_flux(m, cxy, t, rp) - p).norm() < 1e-12);
      break;
    }
  }
}

TEST_CASE("RT0 interpolation preserves mean normal fluxes") {
  Mesh m = refined_square(1);
  auto field = [](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); };
  FieldVector fh = interpolate_flux(m, {Family::RT, 0}, field);
  // interpolant != field, but each edge's mean normal flux matches
  for (int ge = 0; ge < m.n_edges(); ++ge) {
    const Edge& ed = m.edges[ge];
    const Vec2 p0 = m.vertices[ed.a], p1 = m.vertices[ed.b];
    const double analytic = integrate_segment(
        [&](const Vec2& x) { return field(x).dot(ed.normal); }, p0, p1, 6);
    CHECK(fh.coeffs[ge] == doctest::Approx(analytic).epsilon(1e-12));
  }
  const double err = flux_l2_error(m, fh, field);
  CHECK(err > 1e-3);  // genuinely outside RT0
}

TEST_CASE("element-wise L2 projection") {
  Mesh m = refined_square(1);
  FieldVector p0 = l2_project(m, 0, [](const Vec2&) { return 1.0; });
  for (int i = 0; i < p0.coeffs.size(); ++i)
    CHECK(p0.coeffs[i] == doctest::Approx(1.0).epsilon(1e-13));

  FieldVector px = l2_project(m, 0, [](const Vec2& x) { return x.x(); });
  for (int t = 0; t < m.n_triangles(); ++t)
    CHECK(px.coeffs[t] == doctest::Approx(m.centroid(t).x()).epsilon(1e-12));

  // projection of x^2 onto P_1 on the reference-triangle mesh: the residual
  // is L2-orthogonal to P_1
  Mesh one = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}}, {0});
  auto f = [](const Vec2& x) { return x.x() * x.x(); };
  FieldVector pr = l2_project(one, 1, f);
  for (int j = 0; j < 3; ++j) {
    const double resid = integrate_triangle(
        [&](const Vec2& x) {
          return (f(x) - evaluate_scalar(one, pr, 0, x)) *
                 scalar_basis(1, x).values[j];
        },
        {0, 0}, {1, 0}, {0, 1}, 8);
    CHECK(std::abs(resid) < 1e-13);
  }
  // projection reproduces polynomials of the target degree
  FieldVector plin = l2_project(m, 1, [](const Vec2& x) { return 2 * x.x() - x.y(); });
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.1, 0.4);
  for (int t = 0; t < m.n_triangles(); ++t) {
    const Vec2 rp(u(rng), u(rng));
    const Vec2 phys = element_geometry(m, t).map(rp);
    CHECK(evaluate_scalar(m, plin, t, rp) ==
          doctest::Approx(2 * phys.x() - phys.y()).epsilon(1e-12));
  }
}

TEST_CASE("commuting diagram") {
  Mesh m = refined_square(2);

  AnalyticVectorField quad{
      [](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); },
      [](const Vec2& x) { return 3.0 * x.x(); }};
  CHECK(check_commuting(m, {Family::RT, 0}, quad) < 1e-10);

  AnalyticVectorField constant{[](const Vec2&) { return Vec2(0.7, -0.3); },
                               [](const Vec2&) { return 0.0; }};
  CHECK(check_commuting(m, {Family::RT, 0}, constant) < 1e-14);

  AnalyticVectorField trig{
      [](const Vec2& x) { return Vec2(std::sin(x.y()), std::cos(x.x())); },
      [](const Vec2&) { return 0.0; }};
  MomentQuadrature mq;
  mq.excess = 6;
  CHECK(check_commuting(m, {Family::RT, 1}, trig, mq) < 1e-8);
}

TEST_CASE("commuting diagram for random polynomial fields, all spaces") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mesh m = refined_square(1);
  for (const SpaceDescriptor desc :
       {SpaceDescriptor{Family::RT, 0}, SpaceDescriptor{Family::RT, 1},
        SpaceDescriptor{Family::BDM, 1}, SpaceDescriptor{Family::BDM, 2}}) {
    const int d = desc.degree + 3;
    // random bivariate polynomial components of total degree <= d
    std::vector<double> cx, cy;
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        cx.push_back(u(rng));
        cy.push_back(u(rng));
      }
    auto eval = [d](const std::vector<double>& c, const Vec2& p, int dax,
                    int day) {
      double s = 0;
      int i = 0;
      for (int a = 0; a <= d; ++a)
        for (int b = 0; a + b <= d; ++b, ++i) {
          if (a < dax || b < day) continue;
          double term = c[i];
          for (int k = 0; k < dax; ++k) term *= (a - k);
          for (int k = 0; k < day; ++k) term *= (b - k);
          term *= std::pow(p.x(), a - dax) * std::pow(p.y(), b - day);
          s += term;
        }
      return s;
    };
    AnalyticVectorField field{
        [&](const Vec2& p) { return Vec2(eval(cx, p, 0, 0), eval(cy, p, 0, 0)); },
        [&](const Vec2& p) { return eval(cx, p, 1, 0) + eval(cy, p, 0, 1); }};
    MomentQuadrature mq;
    mq.excess = 2 * d;  // polynomial-exact moments
    CHECK(check_commuting(m, desc, field, mq) < 1e-10);
  }
}

TEST_CASE("interpolation is local") {
  Mesh m = refined_square(1);
  auto field = [](const Vec2& x) {
    return Vec2(std::sin(x.x() + 2 * x.y()), std::cos(3 * x.x()));
  };
  const int target = 3;
  auto masked = [&](const Vec2& x) {
    return m.distance_to_triangle(target, x) <= 1e-12 ? field(x) : Vec2(0, 0);
  };
  FieldVector full = interpolate_flux(m, {Family::RT, 1}, field);
  FieldVector local = interpolate_flux(m, {Family::RT, 1}, masked);
  const auto& l2g = full.dofmap->local_to_global[target];
  std::vector<bool> mine(full.dofmap->n_global, false);
  for (int g : l2g) mine[g] = true;
  for (int g = 0; g < full.dofmap->n_global; ++g) {
    if (mine[g])
      CHECK(local.coeffs[g] == doctest::Approx(full.coeffs[g]).epsilon(1e-12));
    else
      CHECK(std::abs(local.coeffs[g]) < 1e-14);
  }
}

TEST_CASE("interpolation error decays at the expected rate") {
  const double pi = 3.14159265358979323846;
  auto grad_u = [pi](const Vec2& x) {
    return Vec2(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  struct Case {
    SpaceDescriptor desc;
    double rate;
  };
  for (const Case c : {Case{{Family::RT, 0}, 1.0}, Case{{Family::RT, 1}, 2.0},
                       Case{{Family::BDM, 1}, 2.0}}) {
    std::vector<double> errs;
    for (int level = 1; level <= 4; ++level) {
      Mesh m = refined_square(level);
      FieldVector fh = interpolate_flux(m, c.desc, grad_u);
      errs.push_back(flux_l2_error(m, fh, grad_u));
    }
    const double rate = std::log2(errs[errs.size() - 2] / errs.back());
    CHECK(rate == doctest::Approx(c.rate).epsilon(0.1));
  }
}
