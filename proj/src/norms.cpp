#include "mixedfem/norms.hpp"

#include <cmath>
#include <fstream>

namespace mixedfem {

namespace {

const Vec2* singular_on_triangle(const Mesh& mesh, int t,
                                 const std::vector<Vec2>& pts) {
  for (const Vec2& p : pts)
    if (mesh.distance_to_triangle(t, p) <= 1e-10 * (1.0 + mesh.h_K[t]))
      return &p;
  return nullptr;
}

const Vec2* singular_on_edge(const Mesh& mesh, int ge,
                             const std::vector<Vec2>& pts) {
  const Edge& ed = mesh.edges[ge];
  for (const Vec2& p : pts)
    if ((mesh.vertices[ed.a] - p).norm() <= 1e-12 * (1.0 + ed.length) ||
        (mesh.vertices[ed.b] - p).norm() <= 1e-12 * (1.0 + ed.length))
      return &p;
  return nullptr;
}

}  // namespace

PiecewisePolyField as_piecewise(const Mesh& mesh, const FieldVector& field) {
  PiecewisePolyField out;
  out.degree = field.dofmap->space.degree;
  out.value = [&mesh, &field](int t, const Vec2& rp) {
    return evaluate_scalar(mesh, field, t, rp);
  };
  out.gradient = [&mesh, &field](int t, const Vec2& rp) {
    return evaluate_scalar_grad(mesh, field, t, rp);
  };
  return out;
}

double flux_error_weighted_l2(const Mesh& mesh, const CoefficientField& coeff,
                              const VectorField& exact_sigma,
                              const FieldVector& sigma_h,
                              const NormOptions& opts,
                              ElementErrors* breakdown) {
  double total = 0.0;
  if (breakdown) breakdown->err_l2_sq.assign(mesh.n_triangles(), 0.0);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(sigma_h.dofmap->space, geom);
    const Eigen::VectorXd cf = local_coeffs(sigma_h, t);
    const double inv_alpha = 1.0 / coeff.alpha_by_triangle[t];
    ScalarField density = [&](const Vec2& x) {
      const FluxBasisEval ev = basis.eval(geom.unmap(x));
      const Vec2 val(ev.values.col(0).dot(cf), ev.values.col(1).dot(cf));
      return inv_alpha * (exact_sigma(x) - val).squaredNorm();
    };
    const Vec2* sing = singular_on_triangle(mesh, t, opts.singular_points);
    const double contrib =
        sing ? integrate_triangle_dyadic(density, geom.v[0], geom.v[1],
                                         geom.v[2], *sing, opts.dyadic_depth,
                                         opts.quad_order)
             : integrate_triangle(density, geom.v[0], geom.v[1], geom.v[2],
                                  opts.quad_order);
    total += contrib;
    if (breakdown) breakdown->err_l2_sq[t] = contrib;
  }
  return std::sqrt(total);
}

double discrete_flux_norm_alpha_h(const Mesh& mesh,
                                  const CoefficientField& coeff,
                                  const FieldVector& tau_h) {
  const SpaceDescriptor desc = tau_h.dofmap->space;
  const int k = desc.degree;
  double total = 0.0;
  const QuadratureRule rule = quadrature(2 * k + 2);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(desc, geom);
    const Eigen::VectorXd cf = local_coeffs(tau_h, t);
    const double inv_alpha = 1.0 / coeff.alpha_by_triangle[t];
    for (int q = 0; q < rule.size(); ++q) {
      const FluxBasisEval ev = basis.eval(rule.ref_point(q));
      const Vec2 val(ev.values.col(0).dot(cf), ev.values.col(1).dot(cf));
      total += rule.weights[q] * geom.det() * inv_alpha * val.squaredNorm();
    }
  }
  // Edge terms: the normal trace is single-valued (H(div) conformity), so it
  // can be evaluated from the lower-indexed incident triangle.
  const GaussRule1D gl = gauss_legendre(k + 2);
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& ed = mesh.edges[ge];
    const int t = ed.tri[0];
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(desc, geom);
    const Eigen::VectorXd cf = local_coeffs(tau_h, t);
    int le = 0;
    while (mesh.triangle_to_edges[t][le] != ge) ++le;
    double tr2 = 0.0;
    for (size_t q = 0; q < gl.points.size(); ++q) {
      const double tn = basis.edge_normal_values(le, gl.points[q]).dot(cf);
      tr2 += gl.weights[q] * ed.length * tn * tn;
    }
    total += mesh.h_F[ge] / coeff.alpha_harmonic_by_edge[ge] * tr2;
  }
  return std::sqrt(total);
}

double potential_error_dg(const Mesh& mesh, const CoefficientField& coeff,
                          const AnalyticScalarField& exact_u,
                          const PiecewisePolyField& u_field,
                          const ScalarField& g, const NormOptions& opts) {
  double total = 0.0;
  // broken weighted gradient
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const double alpha = coeff.alpha_by_triangle[t];
    ScalarField density = [&](const Vec2& x) {
      return alpha *
             (exact_u.gradient(x) - u_field.gradient(t, geom.unmap(x)))
                 .squaredNorm();
    };
    const Vec2* sing = singular_on_triangle(mesh, t, opts.singular_points);
    total += sing ? integrate_triangle_dyadic(density, geom.v[0], geom.v[1],
                                              geom.v[2], *sing,
                                              opts.dyadic_depth,
                                              opts.quad_order)
                  : integrate_triangle(density, geom.v[0], geom.v[1], geom.v[2],
                                       opts.quad_order);
  }
  // edge terms; the exact u is continuous, so the interior jump of the error
  // is the jump of u_field
  const int gl_points = std::max(u_field.degree + 2, opts.quad_order / 2 + 1);
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& ed = mesh.edges[ge];
    const Vec2 p0 = mesh.vertices[ed.a];
    const Vec2 p1 = mesh.vertices[ed.b];
    if (ed.cls == EdgeClass::Interior) {
      const TriangleGeometry g0 = element_geometry(mesh, ed.tri[0]);
      const TriangleGeometry g1 = element_geometry(mesh, ed.tri[1]);
      ScalarField jump2 = [&](const Vec2& x) {
        const double j = u_field.value(ed.tri[0], g0.unmap(x)) -
                         u_field.value(ed.tri[1], g1.unmap(x));
        return j * j;
      };
      const double term = integrate_segment(jump2, p0, p1, gl_points);
      total += coeff.alpha_harmonic_by_edge[ge] / mesh.h_F[ge] * term;
    } else {
      const int t = ed.tri[0];
      const TriangleGeometry geom = element_geometry(mesh, t);
      ScalarField bdry2 = [&](const Vec2& x) {
        const double d = g(x) - u_field.value(t, geom.unmap(x));
        return d * d;
      };
      const Vec2* sing = singular_on_edge(mesh, ge, opts.singular_points);
      const double term =
          sing ? integrate_segment_dyadic(bdry2, p0, p1, *sing,
                                          opts.dyadic_depth, gl_points)
               : integrate_segment(bdry2, p0, p1, gl_points);
      total += coeff.alpha_harmonic_by_edge[ge] / mesh.h_F[ge] * term;
    }
  }
  return std::sqrt(total);
}

double flux_error_hdiv_alpha_h(const Mesh& mesh, const CoefficientField& coeff,
                               const VectorField& exact_sigma,
                               const ScalarField& f, const FieldVector& sigma_h,
                               const NormOptions& opts, double* div_part,
                               ElementErrors* breakdown) {
  ElementErrors local;
  ElementErrors* bd = breakdown ? breakdown : &local;
  const double l2 =
      flux_error_weighted_l2(mesh, coeff, exact_sigma, sigma_h, opts, bd);

  bd->err_div_sq.assign(mesh.n_triangles(), 0.0);
  double div_sq = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(sigma_h.dofmap->space, geom);
    const Eigen::VectorXd cf = local_coeffs(sigma_h, t);
    const double inv_alpha = 1.0 / coeff.alpha_by_triangle[t];
    ScalarField density = [&](const Vec2& x) {
      const double d = f(x) - basis.eval(geom.unmap(x)).divergences.dot(cf);
      return inv_alpha * d * d;
    };
    const Vec2* sing = singular_on_triangle(mesh, t, opts.singular_points);
    const double contrib =
        mesh.h_K[t] * mesh.h_K[t] *
        (sing ? integrate_triangle_dyadic(density, geom.v[0], geom.v[1],
                                          geom.v[2], *sing, opts.dyadic_depth,
                                          opts.quad_order)
              : integrate_triangle(density, geom.v[0], geom.v[1], geom.v[2],
                                   opts.quad_order));
    bd->err_div_sq[t] = contrib;
    div_sq += contrib;
  }
  if (div_part) *div_part = std::sqrt(div_sq);
  return std::sqrt(l2 * l2 + div_sq);
}

void write_element_errors_csv(const Mesh& mesh, const CoefficientField& coeff,
                              const ElementErrors& errors,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_element_errors_csv: cannot open " + path);
  out << "triangle_id,h_K,alpha_K,err_l2_sq,err_div_sq\n";
  out.precision(12);
  out << std::scientific;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double e2 = t < static_cast<int>(errors.err_l2_sq.size())
                          ? errors.err_l2_sq[t]
                          : 0.0;
    const double d2 = t < static_cast<int>(errors.err_div_sq.size())
                          ? errors.err_div_sq[t]
                          : 0.0;
    out << t << "," << mesh.h_K[t] << "," << coeff.alpha_by_triangle[t] << ","
        << e2 << "," << d2 << "\n";
  }
}

double equilibration_residual(const Mesh& mesh, const FieldVector& sigma_h,
                              const ScalarField& f, int pot_degree,
                              const MomentQuadrature& mq) {
  // Q_h f is recomputed with the same load quadrature the assembly uses, so
  // that div sigma_h = Q_h f holds at the linear-solver tolerance rather
  // than at the quadrature consistency level.
  const int k_flux = sigma_h.dofmap->space.degree;
  const int load_order = std::min(20, 2 * k_flux + 4 + mq.excess);
  const int nd =
      SpaceDescriptor{Family::DiscontinuousScalar, pot_degree}.local_dimension();

  Eigen::MatrixXd ghat = Eigen::MatrixXd::Zero(nd, nd);
  const QuadratureRule gram_rule = quadrature(std::max(1, 2 * pot_degree));
  for (int q = 0; q < gram_rule.size(); ++q) {
    const ScalarBasis sb = scalar_basis(pot_degree, gram_rule.ref_point(q));
    ghat += gram_rule.weights[q] * sb.values * sb.values.transpose();
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(ghat);

  const QuadratureRule sample = quadrature(2 * std::max(k_flux, pot_degree) + 2);
  double max_resid = 0.0;
  double scale = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis basis(sigma_h.dofmap->space, geom);
    const Eigen::VectorXd cf = local_coeffs(sigma_h, t);

    const Vec2* sing = singular_on_triangle(mesh, t, mq.singular_points);
    Eigen::VectorXd rhs(nd);
    for (int i = 0; i < nd; ++i) {
      ScalarField integrand = [&](const Vec2& x) {
        return f(x) * scalar_basis(pot_degree, geom.unmap(x)).values[i];
      };
      rhs[i] = sing ? integrate_triangle_dyadic(integrand, geom.v[0],
                                                geom.v[1], geom.v[2], *sing,
                                                mq.dyadic_depth, load_order)
                    : integrate_triangle(integrand, geom.v[0], geom.v[1],
                                         geom.v[2], load_order);
    }
    const Eigen::VectorXd qf = llt.solve(rhs / geom.det());

    for (int q = 0; q < sample.size(); ++q) {
      const Vec2 rp = sample.ref_point(q);
      const double div = basis.eval(rp).divergences.dot(cf);
      const double qh = scalar_basis(pot_degree, rp).values.dot(qf);
      max_resid = std::max(max_resid, std::abs(div - qh));
      scale = std::max({scale, std::abs(qh), std::abs(f(geom.map(rp)))});
    }
  }
  // fall back to the flux scale when the load vanishes (e.g. f = 0)
  if (scale == 0.0)
    scale = std::max(1e-300, sigma_h.coeffs.cwiseAbs().maxCoeff());
  return max_resid / scale;
}

}  // namespace mixedfem
