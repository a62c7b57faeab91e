#include "mixedfem/spaces.hpp"

#include <cmath>

namespace mixedfem {

std::shared_ptr<const DofMap> build_dofmap(const Mesh& mesh,
                                           const SpaceDescriptor& desc) {
  desc.validate();
  auto dm = std::make_shared<DofMap>();
  dm->space = desc;
  const int nt = mesh.n_triangles();
  dm->local_to_global.resize(nt);
  dm->signs.resize(nt);

  if (desc.family == Family::DiscontinuousScalar) {
    const int nd = desc.local_dimension();
    dm->n_global = nt * nd;
    for (int t = 0; t < nt; ++t) {
      dm->local_to_global[t].resize(nd);
      dm->signs[t].assign(nd, 1.0);
      for (int j = 0; j < nd; ++j) dm->local_to_global[t][j] = t * nd + j;
    }
    return dm;
  }

  const int ne = desc.edge_dof_count();
  const int ni = desc.interior_dof_count();
  dm->n_global = mesh.n_edges() * ne + nt * ni;
  for (int t = 0; t < nt; ++t) {
    auto& l2g = dm->local_to_global[t];
    l2g.resize(3 * ne + ni);
    dm->signs[t].assign(3 * ne + ni, 1.0);
    for (int e = 0; e < 3; ++e) {
      const int ge = mesh.triangle_to_edges[t][e];
      for (int i = 0; i < ne; ++i) l2g[e * ne + i] = ge * ne + i;
    }
    const int base = mesh.n_edges() * ne + t * ni;
    for (int j = 0; j < ni; ++j) l2g[3 * ne + j] = base + j;
  }
  return dm;
}

FieldVector zero_field(std::shared_ptr<const DofMap> dofmap) {
  FieldVector f;
  f.coeffs = Eigen::VectorXd::Zero(dofmap->n_global);
  f.dofmap = std::move(dofmap);
  return f;
}

Eigen::VectorXd local_coeffs(const FieldVector& field, int t) {
  const auto& l2g = field.dofmap->local_to_global[t];
  Eigen::VectorXd out(l2g.size());
  for (size_t j = 0; j < l2g.size(); ++j) out[j] = field.coeffs[l2g[j]];
  return out;
}

namespace {

bool is_near(const Vec2& a, const Vec2& b, double scale) {
  return (a - b).norm() <= 1e-12 * (1.0 + scale);
}

// Legendre moment weights must match the element DOF convention.
double edge_weight(int i, double s) {
  switch (i) {
    case 0: return 1.0;
    case 1: return 2.0 * s - 1.0;
    default: return 6.0 * s * s - 6.0 * s + 1.0;
  }
}

}  // namespace

FieldVector interpolate_flux(const Mesh& mesh, const SpaceDescriptor& desc,
                             const VectorField& field,
                             const MomentQuadrature& mq) {
  desc.validate();
  const int k = desc.degree;
  const int ne = desc.edge_dof_count();
  FieldVector out = zero_field(build_dofmap(mesh, desc));

  const int edge_points = k + 2 + (mq.excess + 1) / 2;
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& ed = mesh.edges[ge];
    const Vec2 p0 = mesh.vertices[ed.a];
    const Vec2 p1 = mesh.vertices[ed.b];
    const Vec2 n = ed.normal;
    const double len2 = (p1 - p0).squaredNorm();
    for (int i = 0; i < ne; ++i) {
      ScalarField integrand = [&](const Vec2& x) {
        const double s = (x - p0).dot(p1 - p0) / len2;
        return field(x).dot(n) * edge_weight(i, s);
      };
      double val = 0.0;
      bool done = false;
      for (const Vec2& sp : mq.singular_points) {
        if (is_near(sp, p0, ed.length) || is_near(sp, p1, ed.length)) {
          val = integrate_segment_dyadic(integrand, p0, p1, sp,
                                         mq.dyadic_depth, edge_points);
          done = true;
          break;
        }
      }
      if (!done) val = integrate_segment(integrand, p0, p1, edge_points);
      out.coeffs[ge * ne + i] = val;
    }
  }

  const int ni = desc.interior_dof_count();
  if (ni > 0) {
    const int order = std::min(20, 2 * k + 2 + mq.excess);
    const int base = mesh.n_edges() * ne;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const TriangleGeometry geom = element_geometry(mesh, t);
      const auto tests = interior_moment_fields(desc, geom);
      for (int j = 0; j < ni; ++j) {
        ScalarField integrand = [&](const Vec2& x) {
          return field(x).dot(tests[j](x));
        };
        const Vec2* sing = nullptr;
        for (const Vec2& sp : mq.singular_points)
          if (mesh.distance_to_triangle(t, sp) <= 1e-10 * (1.0 + mesh.h_K[t]))
            sing = &sp;
        out.coeffs[base + t * ni + j] =
            sing ? integrate_triangle_dyadic(integrand, geom.v[0], geom.v[1],
                                             geom.v[2], *sing, mq.dyadic_depth,
                                             order)
                 : integrate_triangle(integrand, geom.v[0], geom.v[1],
                                      geom.v[2], order);
      }
    }
  }
  return out;
}

FieldVector l2_project(const Mesh& mesh, int k, const ScalarField& f,
                       const MomentQuadrature& mq) {
  const SpaceDescriptor desc{Family::DiscontinuousScalar, k};
  const int nd = desc.local_dimension();
  FieldVector out = zero_field(build_dofmap(mesh, desc));

  // Reference Gram of the monomial basis; the affine pullback makes the
  // element Gram det * Ghat.
  Eigen::MatrixXd ghat = Eigen::MatrixXd::Zero(nd, nd);
  const QuadratureRule rule = quadrature(std::max(1, 2 * k));
  for (int q = 0; q < rule.size(); ++q) {
    const ScalarBasis sb = scalar_basis(k, rule.ref_point(q));
    ghat += rule.weights[q] * sb.values * sb.values.transpose();
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(ghat);

  const int order = std::min(20, 2 * k + 2 + mq.excess);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const double det = geom.det();
    Eigen::VectorXd rhs(nd);
    for (int j = 0; j < nd; ++j) {
      ScalarField integrand = [&](const Vec2& x) {
        return f(x) * scalar_basis(k, geom.unmap(x)).values[j];
      };
      const Vec2* sing = nullptr;
      for (const Vec2& sp : mq.singular_points)
        if (mesh.distance_to_triangle(t, sp) <= 1e-10 * (1.0 + mesh.h_K[t]))
          sing = &sp;
      rhs[j] = sing ? integrate_triangle_dyadic(integrand, geom.v[0], geom.v[1],
                                                geom.v[2], *sing,
                                                mq.dyadic_depth, order)
                    : integrate_triangle(integrand, geom.v[0], geom.v[1],
                                         geom.v[2], order);
    }
    const Eigen::VectorXd c = llt.solve(rhs / det);
    for (int j = 0; j < nd; ++j) out.coeffs[t * nd + j] = c[j];
  }
  return out;
}

double check_commuting(const Mesh& mesh, const SpaceDescriptor& desc,
                       const AnalyticVectorField& field,
                       const MomentQuadrature& mq) {
  desc.validate();
  const int k = desc.degree;
  const int proj_degree = desc.family == Family::RT ? k : k - 1;
  const FieldVector interp = interpolate_flux(mesh, desc, field.value, mq);
  const FieldVector proj = l2_project(mesh, proj_degree, field.divergence, mq);

  double defect = 0.0;
  const QuadratureRule rule = quadrature(2 * k + 3);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementFluxBasis basis(desc, element_geometry(mesh, t));
    const Eigen::VectorXd cf = local_coeffs(interp, t);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 rp = rule.ref_point(q);
      const double div_interp = basis.eval(rp).divergences.dot(cf);
      const double qh = evaluate_scalar(mesh, proj, t, rp);
      defect = std::max(defect, std::abs(div_interp - qh));
    }
  }
  return defect;
}

Vec2 evaluate_flux(const Mesh& mesh, const FieldVector& field, int t,
                   const Vec2& ref_point) {
  const ElementFluxBasis basis(field.dofmap->space, element_geometry(mesh, t));
  const FluxBasisEval ev = basis.eval(ref_point);
  const Eigen::VectorXd cf = local_coeffs(field, t);
  return Vec2(ev.values.col(0).dot(cf), ev.values.col(1).dot(cf));
}

double evaluate_flux_div(const Mesh& mesh, const FieldVector& field, int t,
                         const Vec2& ref_point) {
  const ElementFluxBasis basis(field.dofmap->space, element_geometry(mesh, t));
  return basis.eval(ref_point).divergences.dot(local_coeffs(field, t));
}

double evaluate_scalar(const Mesh& mesh, const FieldVector& field, int t,
                       const Vec2& ref_point) {
  (void)mesh;
  const int k = field.dofmap->space.degree;
  const ScalarBasis sb = scalar_basis(k, ref_point);
  return sb.values.dot(local_coeffs(field, t));
}

Vec2 evaluate_scalar_grad(const Mesh& mesh, const FieldVector& field, int t,
                          const Vec2& ref_point) {
  const int k = field.dofmap->space.degree;
  const ScalarBasis sb = scalar_basis(k, ref_point);
  const Eigen::VectorXd cf = local_coeffs(field, t);
  const Vec2 ref_grad(sb.gradients.col(0).dot(cf), sb.gradients.col(1).dot(cf));
  const TriangleGeometry geom = element_geometry(mesh, t);
  return geom.jacobian().inverse().transpose() * ref_grad;
}

}  // namespace mixedfem
