#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "mixedfem/errors.hpp"
#include "mixedfem/mesh.hpp"

namespace mixedfem {

enum class Family { RT, BDM, DiscontinuousScalar };

struct SpaceDescriptor {
  Family family = Family::RT;
  int degree = 0;

  /// Dimension of the local shape space on one triangle.
  int local_dimension() const;
  /// Flux families: number of normal-moment DOFs per edge (k+1).
  int edge_dof_count() const;
  /// Flux families: number of interior DOFs per triangle.
  int interior_dof_count() const;
  /// Throws UnsupportedDegree if the (family, degree) pair is not supported.
  void validate() const;
  std::string name() const;
};

/// Triangle quadrature. Points are barycentric, weights sum to the reference
/// area 1/2.
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int order = 0;

  int size() const { return static_cast<int>(weights.size()); }
  /// Reference coordinates (x, y) = (lambda_1, lambda_2) of point i.
  Vec2 ref_point(int i) const {
    return Vec2(points[i][1], points[i][2]);
  }
};

/// Rule exact for all polynomials of total degree <= order, 1 <= order <= 20.
QuadratureRule quadrature(int order);

/// Gauss-Legendre nodes/weights on [0,1]; exact for degree <= 2n-1.
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule1D gauss_legendre(int n_points);

/// Affine geometry of one physical triangle plus the orientation of its
/// edges relative to the mesh-wide canonical edge orientation. Local edge e
/// is opposite local vertex e.
struct TriangleGeometry {
  std::array<Vec2, 3> v;
  // +1 if the canonical edge normal coincides with this triangle's outward
  // normal on local edge e.
  std::array<double, 3> normal_sign{1.0, 1.0, 1.0};
  // +1 if the canonical tangent (lower global vertex index -> higher) agrees
  // with the local ccw traversal of edge e.
  std::array<double, 3> tangent_sign{1.0, 1.0, 1.0};

  Eigen::Matrix2d jacobian() const;     // columns v1-v0, v2-v0
  double det() const;                   // = 2 * area, positive for ccw
  double area() const { return 0.5 * det(); }
  Vec2 map(const Vec2& ref) const;      // reference -> physical
  Vec2 unmap(const Vec2& phys) const;   // physical -> reference
  /// Start/end of local edge e in canonical tangent order.
  std::pair<Vec2, Vec2> edge_canonical(int e) const;
  /// Canonical unit normal on local edge e.
  Vec2 edge_normal(int e) const;
  double edge_length(int e) const;
};

TriangleGeometry element_geometry(const Mesh& mesh, int t);

/// Scalar P_k basis on the reference triangle: monomials ordered by total
/// degree, the first function is the constant 1. Supported for 0 <= k <= 3.
struct ScalarBasis {
  Eigen::VectorXd values;
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradients;
};
ScalarBasis scalar_basis(int k, const Vec2& ref_point);

/// Values and divergences of the element flux basis at one point,
/// in physical coordinates.
struct FluxBasisEval {
  Eigen::Matrix<double, Eigen::Dynamic, 2> values;
  Eigen::VectorXd divergences;
};

/// Dual (Kronecker) basis of an RT/BDM element on one physical triangle.
/// The basis is contravariant-Piola mapped and expressed in the canonical
/// edge orientation, so coefficients of shared edge DOFs agree between the
/// two incident triangles without extra sign bookkeeping.
///
/// Local DOF order: edge-major moments (edge 0..2, moment degree 0..k),
/// then interior moments.
class ElementFluxBasis {
 public:
  ElementFluxBasis(const SpaceDescriptor& desc, const TriangleGeometry& geom);

  int size() const { return static_cast<int>(coeff_.cols()); }
  const SpaceDescriptor& space() const { return desc_; }
  const TriangleGeometry& geometry() const { return geom_; }

  FluxBasisEval eval(const Vec2& ref_point) const;
  /// Normal components tau_i . n_F of all basis functions at a point of
  /// local edge e (s = canonical edge parameter in [0,1]).
  Eigen::VectorXd edge_normal_values(int e, double s) const;

 private:
  SpaceDescriptor desc_;
  TriangleGeometry geom_;
  Eigen::MatrixXd coeff_;  // column i = modal coefficients of dual function i
};

/// Evaluates the flux basis at a point (convenience wrapper around
/// ElementFluxBasis for one-off use).
FluxBasisEval flux_basis(const SpaceDescriptor& desc,
                         const TriangleGeometry& geom, const Vec2& ref_point);

using VectorField = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;

/// Quadrature control for DOF moments of analytic fields: `excess` raises the
/// integration order beyond the polynomial-exact baseline; fields singular at
/// one of `singular_points` are integrated with dyadic subdivision toward the
/// point (depth levels).
struct MomentQuadrature {
  int excess = 4;
  std::vector<Vec2> singular_points;
  int dyadic_depth = 4;
};

/// Degrees of freedom of a smooth vector field: edge normal moments against
/// shifted Legendre polynomials in the canonical edge parameter, then
/// interior moments. The element flux basis is dual to these functionals.
Eigen::VectorXd dof_functionals(const SpaceDescriptor& desc,
                                const TriangleGeometry& geom,
                                const VectorField& field,
                                const MomentQuadrature& mq = {});

/// Interior moment test fields of the DOF set (empty for RT0 and BDM1):
/// componentwise P_{k-1} moments for RT_k, constants plus the curl bubble
/// for BDM_2.
std::vector<VectorField> interior_moment_fields(const SpaceDescriptor& desc,
                                                const TriangleGeometry& geom);

// --- generic integration helpers -----------------------------------------

/// Integral of f over the segment [p0, p1] with n-point Gauss quadrature.
double integrate_segment(const ScalarField& f, const Vec2& p0, const Vec2& p1,
                         int n_points);
/// Same, with dyadic subdivision toward an endpoint equal to `singular`
/// (no-op if neither endpoint matches).
double integrate_segment_dyadic(const ScalarField& f, const Vec2& p0,
                                const Vec2& p1, const Vec2& singular,
                                int depth, int n_points);
/// Integral of f over the triangle (a,b,c).
double integrate_triangle(const ScalarField& f, const Vec2& a, const Vec2& b,
                          const Vec2& c, int order);
/// Same, with dyadic subdivision toward `singular` when it touches the
/// triangle (vertex or interior); falls back to the plain rule otherwise.
double integrate_triangle_dyadic(const ScalarField& f, const Vec2& a,
                                 const Vec2& b, const Vec2& c,
                                 const Vec2& singular, int depth, int order);

}  // namespace mixedfem
