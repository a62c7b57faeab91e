#include "mixedfem/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>

namespace mixedfem {

namespace {

constexpr int kDenseLimit = 2000;

// Gram matrix of |||.|||_{alpha,h} on D_k: broken weighted gradients plus
// scaled interior jumps and Dirichlet boundary terms. Positive definite with
// Dirichlet edges on the whole boundary.
Eigen::SparseMatrix<double> dg_norm_gram(const Mesh& mesh,
                                         const CoefficientField& coeff,
                                         const DofMap& pot) {
  const int k = pot.space.degree;
  const int nd = pot.local_size();
  std::vector<Eigen::Triplet<double>> tr;

  const QuadratureRule rule = quadrature(std::max(1, 2 * k));
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const Eigen::Matrix2d jit = geom.jacobian().inverse().transpose();
    Eigen::MatrixXd g_loc = Eigen::MatrixXd::Zero(nd, nd);
    for (int q = 0; q < rule.size(); ++q) {
      const ScalarBasis sb = scalar_basis(k, rule.ref_point(q));
      Eigen::MatrixXd pg(nd, 2);
      for (int i = 0; i < nd; ++i) {
        const Vec2 gp = jit * Vec2(sb.gradients(i, 0), sb.gradients(i, 1));
        pg(i, 0) = gp.x();
        pg(i, 1) = gp.y();
      }
      g_loc += (rule.weights[q] * geom.det() * coeff.alpha_by_triangle[t]) *
               pg * pg.transpose();
    }
    const auto& l2g = pot.local_to_global[t];
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        tr.emplace_back(l2g[i], l2g[j], g_loc(i, j));
  }

  const GaussRule1D gl = gauss_legendre(k + 2);
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& ed = mesh.edges[ge];
    const Vec2 p0 = mesh.vertices[ed.a];
    const Vec2 p1 = mesh.vertices[ed.b];
    const double w_edge = coeff.alpha_harmonic_by_edge[ge] / mesh.h_F[ge];
    if (ed.cls == EdgeClass::Interior) {
      // jump = v|tri0 - v|tri1; couples both elements
      const std::array<int, 2> tt = ed.tri;
      const TriangleGeometry g0 = element_geometry(mesh, tt[0]);
      const TriangleGeometry g1 = element_geometry(mesh, tt[1]);
      Eigen::MatrixXd j_loc = Eigen::MatrixXd::Zero(2 * nd, 2 * nd);
      for (size_t q = 0; q < gl.points.size(); ++q) {
        const Vec2 x = p0 + gl.points[q] * (p1 - p0);
        Eigen::VectorXd jump(2 * nd);
        jump.head(nd) = scalar_basis(k, g0.unmap(x)).values;
        jump.tail(nd) = -scalar_basis(k, g1.unmap(x)).values;
        j_loc += (gl.weights[q] * ed.length) * jump * jump.transpose();
      }
      std::array<const std::vector<int>*, 2> maps{
          &pot.local_to_global[tt[0]], &pot.local_to_global[tt[1]]};
      for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
          for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j)
              tr.emplace_back((*maps[bi])[i], (*maps[bj])[j],
                              w_edge * j_loc(bi * nd + i, bj * nd + j));
    } else {
      const int t = ed.tri[0];
      const TriangleGeometry geom = element_geometry(mesh, t);
      Eigen::MatrixXd b_loc = Eigen::MatrixXd::Zero(nd, nd);
      for (size_t q = 0; q < gl.points.size(); ++q) {
        const Vec2 x = p0 + gl.points[q] * (p1 - p0);
        const Eigen::VectorXd v = scalar_basis(k, geom.unmap(x)).values;
        b_loc += (gl.weights[q] * ed.length) * v * v.transpose();
      }
      const auto& l2g = pot.local_to_global[t];
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j)
          tr.emplace_back(l2g[i], l2g[j], w_edge * b_loc(i, j));
    }
  }

  Eigen::SparseMatrix<double> n(pot.n_global, pot.n_global);
  n.setFromTriplets(tr.begin(), tr.end());
  return n;
}

// Edge part of the ||.||_{alpha,h} flux Gram: (h_F/alpha_{F,H}) blocks over
// each edge's own moment DOFs (other functions have zero normal trace).
Eigen::SparseMatrix<double> flux_edge_gram(const Mesh& mesh,
                                           const CoefficientField& coeff,
                                           const SpaceDescriptor& desc,
                                           int n_flux) {
  const int ne = desc.edge_dof_count();
  const GaussRule1D gl = gauss_legendre(desc.degree + 2);
  std::vector<Eigen::Triplet<double>> tr;
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& ed = mesh.edges[ge];
    const int t = ed.tri[0];
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(desc, geom);
    int le = 0;
    while (mesh.triangle_to_edges[t][le] != ge) ++le;
    Eigen::MatrixXd e_loc = Eigen::MatrixXd::Zero(ne, ne);
    for (size_t q = 0; q < gl.points.size(); ++q) {
      const Eigen::VectorXd traces = basis.edge_normal_values(le, gl.points[q]);
      Eigen::VectorXd own(ne);
      for (int i = 0; i < ne; ++i) own[i] = traces[le * ne + i];
      e_loc += (gl.weights[q] * ed.length) * own * own.transpose();
    }
    const double w = mesh.h_F[ge] / coeff.alpha_harmonic_by_edge[ge];
    for (int i = 0; i < ne; ++i)
      for (int j = 0; j < ne; ++j)
        tr.emplace_back(ge * ne + i, ge * ne + j, w * e_loc(i, j));
  }
  Eigen::SparseMatrix<double> e(n_flux, n_flux);
  e.setFromTriplets(tr.begin(), tr.end());
  return e;
}

struct Pencil {
  SaddleSystem sys;  // A = M, B = divergence coupling
  Eigen::SparseMatrix<double> n;
};

Pencil build_pencil(const Mesh& mesh, const CoefficientField& coeff,
                    const SpaceDescriptor& flux_desc, int pot_degree) {
  Pencil p;
  p.sys = assemble_system(
      mesh, coeff, flux_desc, pot_degree, [](const Vec2&) { return 0.0; },
      [](const Vec2&) { return 0.0; });
  p.n = dg_norm_gram(mesh, coeff, *p.sys.pot_dofmap);
  return p;
}

// S = B M^{-1} B^T with M kept factored, never inverted densely.
Eigen::MatrixXd dense_schur(const Pencil& p) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> alt(p.sys.A);
  if (alt.info() != Eigen::Success)
    throw EigenSolveFailure("flux mass factorization failed");
  const Eigen::MatrixXd bt = Eigen::MatrixXd(p.sys.B).transpose();
  return bt.transpose() * alt.solve(bt);
}

// Generalized Lanczos for the pencil (P, Q) with full reorthogonalization in
// the Q inner product: returns the extreme eigenvalue approximations. Only
// Q-solves are required, so Q may be kept factored.
struct ExtremeEigs {
  double min = 0.0;
  double max = 0.0;
};

ExtremeEigs lanczos_extreme_eigs(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_p,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve_q,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_q,
    int n, int max_steps = 400, double tol = 1e-10) {
  std::vector<Eigen::VectorXd> vs;   // Q-orthonormal Lanczos vectors
  std::vector<Eigen::VectorXd> qvs;  // cached Q * vs[i]
  std::vector<double> alphas, betas;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) v[i] += 1e-3 * std::sin(1.0 + i);
  {
    const Eigen::VectorXd qv = apply_q(v);
    const double nrm = std::sqrt(v.dot(qv));
    v /= nrm;
    vs.push_back(v);
    qvs.push_back(qv / nrm);
  }
  double prev_min = -1e300, prev_max = 1e300;
  for (int j = 0; j < std::min(max_steps, n); ++j) {
    const Eigen::VectorXd pv = apply_p(vs[j]);
    Eigen::VectorXd w = solve_q(pv);
    alphas.push_back(vs[j].dot(pv));
    // full reorthogonalization in the Q inner product, using cached Q*v
    for (int r = 0; r < 2; ++r)
      for (size_t i = 0; i < vs.size(); ++i) w -= qvs[i].dot(w) * vs[i];
    const Eigen::VectorXd qw = apply_q(w);
    const double beta = std::sqrt(std::max(0.0, w.dot(qw)));
    if (beta < 1e-14) break;  // invariant subspace found
    betas.push_back(beta);
    vs.push_back(w / beta);
    qvs.push_back(qw / beta);

    if (j >= 4 && j % 4 == 0) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j + 1, j + 1);
      for (int i = 0; i <= j; ++i) t(i, i) = alphas[i];
      for (int i = 0; i < j; ++i) {
        t(i, i + 1) = betas[i];
        t(i + 1, i) = betas[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      const double cur_min = es.eigenvalues()(0);
      const double cur_max = es.eigenvalues()(j);
      const bool min_ok = std::abs(cur_min - prev_min) <=
                          tol * std::max(1.0, std::abs(cur_min));
      const bool max_ok = std::abs(cur_max - prev_max) <=
                          tol * std::max(1.0, std::abs(cur_max));
      if (min_ok && max_ok) return {cur_min, cur_max};
      prev_min = cur_min;
      prev_max = cur_max;
    }
  }
  const int m = static_cast<int>(alphas.size());
  if (m == 0) throw EigenSolveFailure("Lanczos produced no iterates");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) t(i, i) = alphas[i];
  for (int i = 0; i + 1 < m; ++i) {
    t(i, i + 1) = betas[i];
    t(i + 1, i) = betas[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  return {es.eigenvalues()(0), es.eigenvalues()(m - 1)};
}

}  // namespace

InfSupSpectrum infsup_spectrum(const Mesh& mesh, const CoefficientField& coeff,
                               const SpaceDescriptor& flux_desc,
                               int pot_degree) {
  const Pencil p = build_pencil(mesh, coeff, flux_desc, pot_degree);
  const int n_pot = p.sys.pot_dofmap->n_global;

  if (n_pot <= kDenseLimit) {
    const Eigen::MatrixXd s = dense_schur(p);
    const Eigen::MatrixXd n = Eigen::MatrixXd(p.n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, n);
    if (es.info() != Eigen::Success)
      throw EigenSolveFailure("generalized eigensolve failed");
    InfSupSpectrum out;
    out.beta = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    out.continuity = std::sqrt(std::max(0.0, es.eigenvalues()(n_pot - 1)));
    return out;
  }

  // Shift-invert at 0: Lanczos on the flipped pencil (N, S), whose dominant
  // end is 1/lambda_min(S, N). One run yields both spectrum ends.
  const Eigen::MatrixXd s = dense_schur(p);
  const Eigen::LLT<Eigen::MatrixXd> slt(s);
  if (slt.info() != Eigen::Success)
    throw EigenSolveFailure("Schur complement not positive definite");
  const ExtremeEigs ee = lanczos_extreme_eigs(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return p.n * x; },
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return slt.solve(x); },
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return s * x; },
      n_pot);
  InfSupSpectrum out;
  out.beta = 1.0 / std::sqrt(ee.max);
  out.continuity = 1.0 / std::sqrt(std::max(1e-300, ee.min));
  return out;
}

double infsup_constant(const Mesh& mesh, const CoefficientField& coeff,
                       const SpaceDescriptor& flux_desc, int pot_degree) {
  return infsup_spectrum(mesh, coeff, flux_desc, pot_degree).beta;
}

double infsup_constant_dual(const Mesh& mesh, const CoefficientField& coeff,
                            const SpaceDescriptor& flux_desc, int pot_degree) {
  const Pencil p = build_pencil(mesh, coeff, flux_desc, pot_degree);
  const int n_pot = p.sys.pot_dofmap->n_global;
  if (n_pot > kDenseLimit)
    throw EigenSolveFailure("dual route cross-check is dense-only");
  const Eigen::MatrixXd s = dense_schur(p);
  const Eigen::MatrixXd n = Eigen::MatrixXd(p.n);
  // min over tau = M^{-1} B^T w of (tau' B' N^{-1} B tau)/(tau' M tau)
  // = min eig of (S N^{-1} S, S)
  const Eigen::MatrixXd sn = s * n.ldlt().solve(s);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sn, s);
  if (es.info() != Eigen::Success)
    throw EigenSolveFailure("dual generalized eigensolve failed");
  return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

double norm_equivalence_constant(const Mesh& mesh,
                                 const CoefficientField& coeff,
                                 const SpaceDescriptor& flux_desc) {
  const int pot_degree =
      flux_desc.family == Family::RT ? flux_desc.degree : flux_desc.degree - 1;
  const SaddleSystem sys = assemble_system(
      mesh, coeff, flux_desc, pot_degree, [](const Vec2&) { return 0.0; },
      [](const Vec2&) { return 0.0; });
  const int n_flux = sys.flux_dofmap->n_global;
  const Eigen::SparseMatrix<double> e =
      flux_edge_gram(mesh, coeff, flux_desc, n_flux);
  const Eigen::SparseMatrix<double> g = sys.A + e;

  if (n_flux <= kDenseLimit) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Eigen::MatrixXd(g), Eigen::MatrixXd(sys.A));
    if (es.info() != Eigen::Success)
      throw EigenSolveFailure("norm equivalence eigensolve failed");
    return std::sqrt(es.eigenvalues()(n_flux - 1));
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mlt(sys.A);
  if (mlt.info() != Eigen::Success)
    throw EigenSolveFailure("flux mass factorization failed");
  const ExtremeEigs ee = lanczos_extreme_eigs(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return g * x; },
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return mlt.solve(x); },
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return sys.A * x; },
      n_flux);
  return std::sqrt(ee.max);
}

}  // namespace mixedfem
