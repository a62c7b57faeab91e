#include "mixedfem/assembly.hpp"

#include <fstream>
#include <vector>

namespace mixedfem {

bool is_stable_pair(const SpaceDescriptor& flux_desc, int pot_degree) {
  if (flux_desc.family == Family::RT) return pot_degree == flux_desc.degree;
  if (flux_desc.family == Family::BDM) return pot_degree == flux_desc.degree - 1;
  return false;
}

SaddleSystem assemble_system(const Mesh& mesh, const CoefficientField& coeff,
                             const SpaceDescriptor& flux_desc, int pot_degree,
                             const ScalarField& f, const ScalarField& g,
                             const MomentQuadrature& mq) {
  flux_desc.validate();
  if (!is_stable_pair(flux_desc, pot_degree))
    throw UnstablePair(flux_desc.name() + " x D" + std::to_string(pot_degree) +
                       " is not a stable pair");

  SaddleSystem sys;
  sys.flux_dofmap = build_dofmap(mesh, flux_desc);
  sys.pot_dofmap =
      build_dofmap(mesh, {Family::DiscontinuousScalar, pot_degree});
  const int n_flux = sys.flux_dofmap->n_global;
  const int n_pot = sys.pot_dofmap->n_global;
  const int k = flux_desc.degree;
  const int nl = flux_desc.local_dimension();
  const int np = sys.pot_dofmap->local_size();

  std::vector<Eigen::Triplet<double>> ta, tb;
  ta.reserve(static_cast<size_t>(mesh.n_triangles()) * nl * nl);
  tb.reserve(static_cast<size_t>(mesh.n_triangles()) * nl * np);
  sys.F_flux = Eigen::VectorXd::Zero(n_flux);
  sys.F_pot = Eigen::VectorXd::Zero(n_pot);

  const QuadratureRule rule_a = quadrature(2 * k + 2);
  const QuadratureRule rule_b = quadrature(std::max(1, k + pot_degree + 1));
  const int load_order = std::min(20, 2 * k + 4 + mq.excess);

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(flux_desc, geom);
    const double det = geom.det();
    const double inv_alpha = 1.0 / coeff.alpha_by_triangle[t];

    Eigen::MatrixXd a_loc = Eigen::MatrixXd::Zero(nl, nl);
    for (int q = 0; q < rule_a.size(); ++q) {
      const FluxBasisEval ev = basis.eval(rule_a.ref_point(q));
      a_loc += (rule_a.weights[q] * det * inv_alpha) * ev.values *
               ev.values.transpose();
    }

    Eigen::MatrixXd b_loc = Eigen::MatrixXd::Zero(np, nl);
    for (int q = 0; q < rule_b.size(); ++q) {
      const Vec2 rp = rule_b.ref_point(q);
      const FluxBasisEval ev = basis.eval(rp);
      const ScalarBasis sb = scalar_basis(pot_degree, rp);
      b_loc += (rule_b.weights[q] * det) * sb.values *
               ev.divergences.transpose();
    }

    const auto& fg = sys.flux_dofmap->local_to_global[t];
    const auto& pg = sys.pot_dofmap->local_to_global[t];
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        ta.emplace_back(fg[i], fg[j], a_loc(i, j));
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < nl; ++j)
        tb.emplace_back(pg[i], fg[j], b_loc(i, j));

    // (f, v) load, with optional dyadic refinement toward singular points
    const Vec2* sing = nullptr;
    for (const Vec2& sp : mq.singular_points)
      if (mesh.distance_to_triangle(t, sp) <= 1e-10 * (1.0 + mesh.h_K[t]))
        sing = &sp;
    for (int i = 0; i < np; ++i) {
      ScalarField integrand = [&](const Vec2& x) {
        return f(x) * scalar_basis(pot_degree, geom.unmap(x)).values[i];
      };
      sys.F_pot[pg[i]] +=
          sing ? integrate_triangle_dyadic(integrand, geom.v[0], geom.v[1],
                                           geom.v[2], *sing, mq.dyadic_depth,
                                           load_order)
               : integrate_triangle(integrand, geom.v[0], geom.v[1], geom.v[2],
                                    load_order);
    }
  }

  // Dirichlet boundary load -<g, tau.n>: only the edge's own moment DOFs have
  // a nonzero normal trace there, and the canonical normal is outward on the
  // boundary.
  const int ne = flux_desc.edge_dof_count();
  const int gl_points = k + 2 + (mq.excess + 1) / 2;
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& ed = mesh.edges[ge];
    if (ed.cls != EdgeClass::Dirichlet) continue;
    const int t = ed.tri[0];
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(flux_desc, geom);
    int le = 0;
    while (mesh.triangle_to_edges[t][le] != ge) ++le;
    const GaussRule1D gl = gauss_legendre(gl_points);
    const auto [p0, p1] = geom.edge_canonical(le);
    for (size_t q = 0; q < gl.points.size(); ++q) {
      const double s = gl.points[q];
      const Vec2 x = p0 + s * (p1 - p0);
      const Eigen::VectorXd traces = basis.edge_normal_values(le, s);
      const double w = gl.weights[q] * ed.length * g(x);
      for (int i = 0; i < ne; ++i)
        sys.F_flux[ge * ne + i] -= w * traces[le * ne + i];
    }
  }

  sys.A.resize(n_flux, n_flux);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(n_pot, n_flux);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  return sys;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& m,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  out.precision(17);
  for (int col = 0; col < m.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace mixedfem
