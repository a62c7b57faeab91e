#include "mixedfem/elements.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace mixedfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Shifted Legendre polynomials on [0,1], used as edge moment weights.
double shifted_legendre(int i, double s) {
  switch (i) {
    case 0: return 1.0;
    case 1: return 2.0 * s - 1.0;
    case 2: return 6.0 * s * s - 6.0 * s + 1.0;
    default: throw UnsupportedDegree("edge moment degree > 2");
  }
}

int scalar_dim(int k) { return (k + 1) * (k + 2) / 2; }

}  // namespace

int SpaceDescriptor::local_dimension() const {
  validate();
  switch (family) {
    case Family::DiscontinuousScalar: return scalar_dim(degree);
    case Family::RT: return (degree + 1) * (degree + 3);
    case Family::BDM: return (degree + 1) * (degree + 2);
  }
  return 0;
}

int SpaceDescriptor::edge_dof_count() const {
  validate();
  if (family == Family::DiscontinuousScalar) return 0;
  return degree + 1;
}

int SpaceDescriptor::interior_dof_count() const {
  return local_dimension() - 3 * edge_dof_count();
}

void SpaceDescriptor::validate() const {
  switch (family) {
    case Family::DiscontinuousScalar:
      if (degree < 0 || degree > 3)
        throw UnsupportedDegree("scalar degree " + std::to_string(degree));
      return;
    case Family::RT:
      if (degree < 0 || degree > 1)
        throw UnsupportedDegree("RT degree " + std::to_string(degree));
      return;
    case Family::BDM:
      if (degree < 1 || degree > 2)
        throw UnsupportedDegree("BDM degree " + std::to_string(degree));
      return;
  }
  throw UnsupportedDegree("unknown family");
}

std::string SpaceDescriptor::name() const {
  switch (family) {
    case Family::RT: return "RT" + std::to_string(degree);
    case Family::BDM: return "BDM" + std::to_string(degree);
    case Family::DiscontinuousScalar: return "P" + std::to_string(degree);
  }
  return "?";
}

GaussRule1D gauss_legendre(int n_points) {
  if (n_points < 1) throw UnsupportedOrder("gauss_legendre needs >= 1 point");
  GaussRule1D r;
  r.points.resize(n_points);
  r.weights.resize(n_points);
  const int n = n_points;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n and P_n'.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points[i] = 0.5 * (1.0 - x);  // ascending on [0,1]
    r.weights[i] = 0.5 * w;
    r.points[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[n - 1 - i] = 0.5 * w;
  }
  return r;
}

QuadratureRule quadrature(int order) {
  if (order < 1 || order > 20)
    throw UnsupportedOrder("quadrature order " + std::to_string(order));

  static std::vector<QuadratureRule> cache(21);
  static std::once_flag built;
  std::call_once(built, [] {
    {
      QuadratureRule r;
      r.order = 1;
      r.points = {Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3)};
      r.weights = {0.5};
      cache[1] = r;
    }
    {
      QuadratureRule r;
      r.order = 2;
      r.points = {Eigen::Vector3d(2.0 / 3, 1.0 / 6, 1.0 / 6),
                  Eigen::Vector3d(1.0 / 6, 2.0 / 3, 1.0 / 6),
                  Eigen::Vector3d(1.0 / 6, 1.0 / 6, 2.0 / 3)};
      r.weights = {1.0 / 6, 1.0 / 6, 1.0 / 6};
      cache[2] = r;
    }
    for (int order = 3; order <= 20; ++order) {
      // Collapsed Gauss-Legendre product rule. With x = u, y = v(1-u) the
      // u-integrand picks up one extra degree from the (1-u) Jacobian.
      QuadratureRule r;
      r.order = order;
      const GaussRule1D gu = gauss_legendre((order + 3) / 2);
      const GaussRule1D gv = gauss_legendre((order + 2) / 2);
      for (size_t a = 0; a < gu.points.size(); ++a) {
        for (size_t b = 0; b < gv.points.size(); ++b) {
          const double u = gu.points[a];
          const double x = u;
          const double y = gv.points[b] * (1.0 - u);
          r.points.emplace_back(1.0 - x - y, x, y);
          r.weights.push_back(gu.weights[a] * gv.weights[b] * (1.0 - u));
        }
      }
      cache[order] = r;
    }
  });
  return cache[order];
}

ScalarBasis scalar_basis(int k, const Vec2& ref_point) {
  if (k < 0 || k > 3) throw UnsupportedDegree("P_k degree " + std::to_string(k));
  const int n = scalar_dim(k);
  ScalarBasis out;
  out.values.resize(n);
  out.gradients.resize(n, 2);
  const double x = ref_point.x(), y = ref_point.y();
  auto ipow = [](double b, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  };
  int idx = 0;
  for (int d = 0; d <= k; ++d) {
    for (int j = 0; j <= d; ++j, ++idx) {
      const int a = d - j, b = j;
      out.values[idx] = ipow(x, a) * ipow(y, b);
      out.gradients(idx, 0) = a > 0 ? a * ipow(x, a - 1) * ipow(y, b) : 0.0;
      out.gradients(idx, 1) = b > 0 ? b * ipow(x, a) * ipow(y, b - 1) : 0.0;
    }
  }
  return out;
}

Eigen::Matrix2d TriangleGeometry::jacobian() const {
  Eigen::Matrix2d B;
  B.col(0) = v[1] - v[0];
  B.col(1) = v[2] - v[0];
  return B;
}

double TriangleGeometry::det() const { return jacobian().determinant(); }

Vec2 TriangleGeometry::map(const Vec2& ref) const {
  return v[0] + jacobian() * ref;
}

Vec2 TriangleGeometry::unmap(const Vec2& phys) const {
  return jacobian().inverse() * (phys - v[0]);
}

std::pair<Vec2, Vec2> TriangleGeometry::edge_canonical(int e) const {
  const Vec2& p = v[(e + 1) % 3];
  const Vec2& q = v[(e + 2) % 3];
  return tangent_sign[e] > 0 ? std::make_pair(p, q) : std::make_pair(q, p);
}

Vec2 TriangleGeometry::edge_normal(int e) const {
  const Vec2 t = (v[(e + 2) % 3] - v[(e + 1) % 3]).normalized();
  return normal_sign[e] * Vec2(t.y(), -t.x());
}

double TriangleGeometry::edge_length(int e) const {
  return (v[(e + 2) % 3] - v[(e + 1) % 3]).norm();
}

TriangleGeometry element_geometry(const Mesh& mesh, int t) {
  TriangleGeometry g;
  for (int i = 0; i < 3; ++i) g.v[i] = mesh.vertices[mesh.triangles[t][i]];
  for (int e = 0; e < 3; ++e) {
    const Edge& ed = mesh.edges[mesh.triangle_to_edges[t][e]];
    g.normal_sign[e] = mesh.triangle_edge_sign[t][e];
    g.tangent_sign[e] = mesh.triangles[t][(e + 1) % 3] == ed.a ? 1.0 : -1.0;
  }
  return g;
}

namespace {

// Shape-space (modal) basis on the reference triangle: P_k^2 monomial vector
// fields, plus x * (homogeneous degree-k monomials) for RT. Returned in
// reference coordinates; the Piola map takes them to the physical element.
struct ModalEval {
  Eigen::Matrix<double, Eigen::Dynamic, 2> values;
  Eigen::VectorXd divergences;
};

int modal_count(const SpaceDescriptor& d) {
  return d.family == Family::RT ? 2 * scalar_dim(d.degree) + d.degree + 1
                                : 2 * scalar_dim(d.degree);
}

ModalEval eval_modal_ref(const SpaceDescriptor& desc, const Vec2& p) {
  const int k = desc.degree;
  const ScalarBasis sb = scalar_basis(k, p);
  const int ns = scalar_dim(k);
  const int n = modal_count(desc);
  ModalEval out;
  out.values.setZero(n, 2);
  out.divergences.setZero(n);
  for (int i = 0; i < ns; ++i) {
    out.values(2 * i, 0) = sb.values[i];
    out.divergences(2 * i) = sb.gradients(i, 0);
    out.values(2 * i + 1, 1) = sb.values[i];
    out.divergences(2 * i + 1) = sb.gradients(i, 1);
  }
  if (desc.family == Family::RT) {
    // x * m with m = x^a y^(k-a); div(x m) = (k+2) m by Euler's identity.
    for (int a = 0; a <= k; ++a) {
      double m = 1.0;
      for (int i = 0; i < a; ++i) m *= p.x();
      for (int i = 0; i < k - a; ++i) m *= p.y();
      const int row = 2 * ns + a;
      out.values(row, 0) = p.x() * m;
      out.values(row, 1) = p.y() * m;
      out.divergences(row) = (k + 2) * m;
    }
  }
  return out;
}

// Physical values of all modal functions at a physical point.
ModalEval eval_modal_phys(const SpaceDescriptor& desc,
                          const TriangleGeometry& geom, const Vec2& ref) {
  ModalEval m = eval_modal_ref(desc, ref);
  const Eigen::Matrix2d B = geom.jacobian();
  const double idet = 1.0 / geom.det();
  for (int i = 0; i < m.values.rows(); ++i) {
    const Vec2 val = idet * (B * Vec2(m.values(i, 0), m.values(i, 1)));
    m.values(i, 0) = val.x();
    m.values(i, 1) = val.y();
    m.divergences(i) *= idet;
  }
  return m;
}

}  // namespace

// For RT_k these are the coordinate components against P_{k-1} pulled back
// from the reference element; for BDM_2 the two constants plus the
// divergence-free curl bubble.
std::vector<VectorField> interior_moment_fields(const SpaceDescriptor& desc,
                                                const TriangleGeometry& geom) {
  std::vector<VectorField> fields;
  if (desc.family == Family::RT && desc.degree >= 1) {
    const int kk = desc.degree - 1;
    for (int i = 0; i < scalar_dim(kk); ++i) {
      for (int comp = 0; comp < 2; ++comp) {
        fields.push_back([i, kk, comp, geom](const Vec2& x) {
          const double m = scalar_basis(kk, geom.unmap(x)).values[i];
          return comp == 0 ? Vec2(m, 0.0) : Vec2(0.0, m);
        });
      }
    }
  } else if (desc.family == Family::BDM && desc.degree == 2) {
    fields.push_back([](const Vec2&) { return Vec2(1.0, 0.0); });
    fields.push_back([](const Vec2&) { return Vec2(0.0, 1.0); });
    // curl of the cubic bubble lambda_0 lambda_1 lambda_2
    const Eigen::Matrix2d Jit = geom.jacobian().inverse().transpose();
    const Vec2 g0 = Jit * Vec2(-1.0, -1.0);
    const Vec2 g1 = Jit * Vec2(1.0, 0.0);
    const Vec2 g2 = Jit * Vec2(0.0, 1.0);
    fields.push_back([geom, g0, g1, g2](const Vec2& x) {
      const Vec2 r = geom.unmap(x);
      const double l0 = 1.0 - r.x() - r.y(), l1 = r.x(), l2 = r.y();
      const Vec2 grad = l1 * l2 * g0 + l0 * l2 * g1 + l0 * l1 * g2;
      return Vec2(grad.y(), -grad.x());
    });
  }
  return fields;
}

namespace {

double distance_to_tri(const Vec2& p, const Vec2& a, const Vec2& b,
                       const Vec2& c) {
  auto sarea = [](const Vec2& u, const Vec2& v, const Vec2& w) {
    return 0.5 * ((v.x() - u.x()) * (w.y() - u.y()) -
                  (w.x() - u.x()) * (v.y() - u.y()));
  };
  if (sarea(p, a, b) >= 0 && sarea(p, b, c) >= 0 && sarea(p, c, a) >= 0)
    return 0.0;
  auto seg = [](const Vec2& x, const Vec2& u, const Vec2& v) {
    const Vec2 d = v - u;
    double t = d.squaredNorm() > 0 ? (x - u).dot(d) / d.squaredNorm() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (x - (u + t * d)).norm();
  };
  return std::min({seg(p, a, b), seg(p, b, c), seg(p, c, a)});
}

// Applies the DOF functionals to an arbitrary vector-valued integrand given
// as physical-point evaluations; shared by the Vandermonde construction and
// by dof_functionals.
template <typename EvalVec>
Eigen::VectorXd apply_functionals(const SpaceDescriptor& desc,
                                  const TriangleGeometry& geom,
                                  const EvalVec& field, int edge_points,
                                  int interior_order,
                                  const MomentQuadrature* mq) {
  const int n_edge = desc.edge_dof_count();
  const auto interior = interior_moment_fields(desc, geom);
  Eigen::VectorXd out(3 * n_edge + static_cast<int>(interior.size()));

  auto near = [](const Vec2& a, const Vec2& b, double scale) {
    return (a - b).norm() <= 1e-12 * (1.0 + scale);
  };

  for (int e = 0; e < 3; ++e) {
    const auto [p0, p1] = geom.edge_canonical(e);
    const Vec2 n = geom.edge_normal(e);
    const double len = geom.edge_length(e);
    for (int i = 0; i < n_edge; ++i) {
      ScalarField integrand = [&](const Vec2& x) {
        // canonical parameter of x on the edge
        const double s = (x - p0).dot(p1 - p0) / (len * len);
        return field(x).dot(n) * shifted_legendre(i, s);
      };
      double val = 0.0;
      bool dyadic = false;
      if (mq) {
        for (const Vec2& sp : mq->singular_points) {
          if (near(sp, p0, len) || near(sp, p1, len)) {
            val = integrate_segment_dyadic(integrand, p0, p1, sp,
                                           mq->dyadic_depth, edge_points);
            dyadic = true;
            break;
          }
        }
      }
      if (!dyadic) val = integrate_segment(integrand, p0, p1, edge_points);
      out[e * n_edge + i] = val;
    }
  }

  for (size_t j = 0; j < interior.size(); ++j) {
    ScalarField integrand = [&](const Vec2& x) {
      return field(x).dot(interior[j](x));
    };
    const Vec2* sing = nullptr;
    if (mq) {
      for (const Vec2& sp : mq->singular_points)
        if (distance_to_tri(sp, geom.v[0], geom.v[1], geom.v[2]) <= 1e-10)
          sing = &sp;
    }
    out[3 * n_edge + j] =
        sing ? integrate_triangle_dyadic(integrand, geom.v[0], geom.v[1],
                                         geom.v[2], *sing, mq->dyadic_depth,
                                         interior_order)
             : integrate_triangle(integrand, geom.v[0], geom.v[1], geom.v[2],
                                  interior_order);
  }
  return out;
}

}  // namespace

ElementFluxBasis::ElementFluxBasis(const SpaceDescriptor& desc,
                                   const TriangleGeometry& geom)
    : desc_(desc), geom_(geom) {
  desc.validate();
  if (desc.family == Family::DiscontinuousScalar)
    throw UnsupportedDegree("flux basis requested for a scalar space");
  const int n = desc.local_dimension();
  const int k = desc.degree;

  // Vandermonde of the DOF functionals against the Piola-mapped modal basis.
  auto modal_field = [&](int j) {
    return [this, j](const Vec2& x) {
      const ModalEval m = eval_modal_phys(desc_, geom_, geom_.unmap(x));
      return Vec2(m.values(j, 0), m.values(j, 1));
    };
  };
  Eigen::MatrixXd V(n, n);
  for (int j = 0; j < n; ++j)
    V.col(j) = apply_functionals(desc, geom, modal_field(j), k + 2, 2 * k + 4,
                                 nullptr);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (!lu.isInvertible())
    throw Error("flux element basis: singular DOF Vandermonde");
  coeff_ = lu.inverse();
}

FluxBasisEval ElementFluxBasis::eval(const Vec2& ref_point) const {
  const ModalEval m = eval_modal_phys(desc_, geom_, ref_point);
  FluxBasisEval out;
  out.values = coeff_.transpose() * m.values;
  out.divergences = coeff_.transpose() * m.divergences;
  return out;
}

Eigen::VectorXd ElementFluxBasis::edge_normal_values(int e, double s) const {
  const auto [p0, p1] = geom_.edge_canonical(e);
  const Vec2 x = p0 + s * (p1 - p0);
  const FluxBasisEval ev = eval(geom_.unmap(x));
  const Vec2 n = geom_.edge_normal(e);
  return ev.values * Eigen::Vector2d(n);
}

FluxBasisEval flux_basis(const SpaceDescriptor& desc,
                         const TriangleGeometry& geom, const Vec2& ref_point) {
  return ElementFluxBasis(desc, geom).eval(ref_point);
}

Eigen::VectorXd dof_functionals(const SpaceDescriptor& desc,
                                const TriangleGeometry& geom,
                                const VectorField& field,
                                const MomentQuadrature& mq) {
  desc.validate();
  const int k = desc.degree;
  const int edge_points = k + 2 + (mq.excess + 1) / 2;
  const int interior_order = std::min(20, 2 * k + 2 + mq.excess);
  return apply_functionals(desc, geom, field, edge_points, interior_order,
                           &mq);
}

double integrate_segment(const ScalarField& f, const Vec2& p0, const Vec2& p1,
                         int n_points) {
  const GaussRule1D g = gauss_legendre(n_points);
  const double len = (p1 - p0).norm();
  double s = 0.0;
  for (size_t q = 0; q < g.points.size(); ++q)
    s += g.weights[q] * f(p0 + g.points[q] * (p1 - p0));
  return s * len;
}

double integrate_segment_dyadic(const ScalarField& f, const Vec2& p0,
                                const Vec2& p1, const Vec2& singular,
                                int depth, int n_points) {
  const double len = (p1 - p0).norm();
  const bool at0 = (singular - p0).norm() <= 1e-12 * (1.0 + len);
  const bool at1 = (singular - p1).norm() <= 1e-12 * (1.0 + len);
  if (!at0 && !at1) return integrate_segment(f, p0, p1, n_points);
  const Vec2 a = at0 ? p0 : p1;
  const Vec2 b = at0 ? p1 : p0;
  // Geometric bisection toward the singular endpoint a.
  double total = 0.0;
  Vec2 far = b;
  for (int d = 0; d < depth; ++d) {
    const Vec2 mid = a + 0.5 * (far - a);
    total += integrate_segment(f, mid, far, n_points);
    far = mid;
  }
  total += integrate_segment(f, a, far, n_points);
  return total;
}

double integrate_triangle(const ScalarField& f, const Vec2& a, const Vec2& b,
                          const Vec2& c, int order) {
  const QuadratureRule rule = quadrature(order);
  const double det = std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                              (c.x() - a.x()) * (b.y() - a.y()));
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::Vector3d& l = rule.points[q];
    s += rule.weights[q] * f(l[0] * a + l[1] * b + l[2] * c);
  }
  return s * det;  // weights sum to 1/2; det = 2 * area
}

namespace {

double integrate_corner_dyadic(const ScalarField& f, const Vec2& s,
                               const Vec2& p, const Vec2& q, int depth,
                               int order) {
  if (depth <= 0) return integrate_triangle(f, s, p, q, order);
  const Vec2 m1 = 0.5 * (s + p);
  const Vec2 m2 = 0.5 * (s + q);
  const Vec2 m3 = 0.5 * (p + q);
  double total = integrate_triangle(f, m1, p, m3, order);
  total += integrate_triangle(f, m1, m3, m2, order);
  total += integrate_triangle(f, m2, m3, q, order);
  total += integrate_corner_dyadic(f, s, m1, m2, depth - 1, order);
  return total;
}

}  // namespace

double integrate_triangle_dyadic(const ScalarField& f, const Vec2& a,
                                 const Vec2& b, const Vec2& c,
                                 const Vec2& singular, int depth, int order) {
  const double diam =
      std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  const double tol = 1e-12 * (1.0 + diam);
  const std::array<Vec2, 3> vs{a, b, c};
  for (int i = 0; i < 3; ++i) {
    if ((vs[i] - singular).norm() <= tol)
      return integrate_corner_dyadic(f, vs[i], vs[(i + 1) % 3], vs[(i + 2) % 3],
                                     depth, order);
  }
  // Inside or on an edge: cut the triangle at the singular point so it
  // becomes a corner of each piece. Outside: plain rule.
  auto sarea = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return 0.5 * ((q.x() - p.x()) * (r.y() - p.y()) -
                  (r.x() - p.x()) * (q.y() - p.y()));
  };
  const double inside_tol = -1e-12 * diam * diam;
  if (sarea(singular, a, b) >= inside_tol && sarea(singular, b, c) >= inside_tol &&
      sarea(singular, c, a) >= inside_tol) {
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2& p = vs[i];
      const Vec2& q = vs[(i + 1) % 3];
      if (std::abs(sarea(singular, p, q)) > tol * diam)
        total += integrate_corner_dyadic(f, singular, p, q, depth, order);
    }
    return total;
  }
  return integrate_triangle(f, a, b, c, order);
}

}  // namespace mixedfem
