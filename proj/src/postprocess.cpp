#include "mixedfem/postprocess.hpp"

namespace mixedfem {

double PostField::value(const Mesh& mesh, int t, const Vec2& rp) const {
  (void)mesh;
  return scalar_basis(degree, rp).values.dot(coeffs.row(t));
}

Vec2 PostField::gradient(const Mesh& mesh, int t, const Vec2& rp) const {
  const ScalarBasis sb = scalar_basis(degree, rp);
  const Vec2 ref_grad(sb.gradients.col(0).dot(coeffs.row(t)),
                      sb.gradients.col(1).dot(coeffs.row(t)));
  return element_geometry(mesh, t).jacobian().inverse().transpose() * ref_grad;
}

PiecewisePolyField as_piecewise(const Mesh& mesh, const PostField& field) {
  PiecewisePolyField out;
  out.degree = field.degree;
  out.value = [&mesh, &field](int t, const Vec2& rp) {
    return field.value(mesh, t, rp);
  };
  out.gradient = [&mesh, &field](int t, const Vec2& rp) {
    return field.gradient(mesh, t, rp);
  };
  return out;
}

PostField stenberg_postprocess(const Mesh& mesh, const CoefficientField& coeff,
                               const FieldVector& sigma_h,
                               const FieldVector& u_h, int flux_index_k,
                               const ScalarField& f,
                               const MomentQuadrature& mq) {
  const SpaceDescriptor flux_desc = sigma_h.dofmap->space;
  if (flux_desc.degree != flux_index_k)
    throw Error("stenberg_postprocess: flux_index_k does not match sigma_h");
  const int kp1 = flux_index_k + 1;
  const int nd = SpaceDescriptor{Family::DiscontinuousScalar, kp1}.local_dimension();

  PostField out;
  out.degree = kp1;
  out.coeffs.resize(mesh.n_triangles(), nd);

  const QuadratureRule grad_rule = quadrature(std::max(1, 2 * kp1));
  const int load_order = std::min(20, 2 * kp1 + 2 + mq.excess);
  const GaussRule1D gl = gauss_legendre(kp1 + flux_desc.degree + 2);

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriangleGeometry geom = element_geometry(mesh, t);
    const ElementFluxBasis flux_basis_t(flux_desc, geom);
    const Eigen::VectorXd sigma_cf = local_coeffs(sigma_h, t);
    const double alpha = coeff.alpha_by_triangle[t];
    const double det = geom.det();
    const Eigen::Matrix2d jit = geom.jacobian().inverse().transpose();

    // gradient Gram (singular on constants) and element means
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nd, nd);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(nd);
    for (int q = 0; q < grad_rule.size(); ++q) {
      const ScalarBasis sb = scalar_basis(kp1, grad_rule.ref_point(q));
      Eigen::MatrixXd pg(nd, 2);  // physical gradients
      for (int i = 0; i < nd; ++i) {
        const Vec2 gphys = jit * Vec2(sb.gradients(i, 0), sb.gradients(i, 1));
        pg(i, 0) = gphys.x();
        pg(i, 1) = gphys.y();
      }
      G += (grad_rule.weights[q] * det * alpha) * pg * pg.transpose();
      mean += (grad_rule.weights[q] * det) * sb.values;
    }

    // right side: (f, v)_K - (sigma_h . n_K, v)_dK
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd);
    const Vec2* sing = nullptr;
    for (const Vec2& sp : mq.singular_points)
      if (mesh.distance_to_triangle(t, sp) <= 1e-10 * (1.0 + mesh.h_K[t]))
        sing = &sp;
    for (int i = 0; i < nd; ++i) {
      ScalarField integrand = [&](const Vec2& x) {
        return f(x) * scalar_basis(kp1, geom.unmap(x)).values[i];
      };
      rhs[i] = sing ? integrate_triangle_dyadic(integrand, geom.v[0], geom.v[1],
                                                geom.v[2], *sing,
                                                mq.dyadic_depth, load_order)
                    : integrate_triangle(integrand, geom.v[0], geom.v[1],
                                         geom.v[2], load_order);
    }
    for (int e = 0; e < 3; ++e) {
      const auto [p0, p1] = geom.edge_canonical(e);
      const double len = geom.edge_length(e);
      // sigma_h . n is stored against the canonical normal; flip to the
      // outward normal of this triangle
      const double outward = geom.normal_sign[e];
      for (size_t q = 0; q < gl.points.size(); ++q) {
        const double s = gl.points[q];
        const Vec2 x = p0 + s * (p1 - p0);
        const double sn =
            outward * flux_basis_t.edge_normal_values(e, s).dot(sigma_cf);
        const ScalarBasis sb = scalar_basis(kp1, geom.unmap(x));
        rhs -= (gl.weights[q] * len * sn) * sb.values;
      }
    }

    // mean of u_h on K
    double uh_mean = 0.0;
    {
      const QuadratureRule r = quadrature(std::max(1, u_h.dofmap->space.degree + 1));
      for (int q = 0; q < r.size(); ++q)
        uh_mean += r.weights[q] * det * evaluate_scalar(mesh, u_h, t, r.ref_point(q));
    }

    // augmented saddle system enforcing the mean constraint
    Eigen::MatrixXd K(nd + 1, nd + 1);
    K.setZero();
    K.topLeftCorner(nd, nd) = G;
    K.topRightCorner(nd, 1) = mean;
    K.bottomLeftCorner(1, nd) = mean.transpose();
    Eigen::VectorXd b(nd + 1);
    b.head(nd) = rhs;
    b[nd] = uh_mean;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible())
      throw LocalSingularSystem("post-processing system singular on triangle " +
                                std::to_string(t));
    out.coeffs.row(t) = lu.solve(b).head(nd);
  }
  return out;
}

}  // namespace mixedfem
