#pragma once

#include "mixedfem/coefficients.hpp"
#include "mixedfem/norms.hpp"
#include "mixedfem/spaces.hpp"

namespace mixedfem {

/// Element-local post-processed potential u* in P_{k+1}(K) per triangle
/// (discontinuous), stored in the reference monomial basis.
struct PostField {
  int degree = 1;              // k+1
  Eigen::MatrixXd coeffs;      // one row per triangle

  double value(const Mesh& mesh, int t, const Vec2& ref_point) const;
  Vec2 gradient(const Mesh& mesh, int t, const Vec2& ref_point) const;
};

PiecewisePolyField as_piecewise(const Mesh& mesh, const PostField& field);

/// Per element: solve (alpha grad u*, grad v) = (f, v) - (sigma_h.n, v)_dK on
/// P_{k+1}(K)/R via a Lagrange-multiplier mean constraint, with the mean of
/// u* matched to the mean of u_h. flux_index_k is the polynomial index of the
/// flux space (k for RT_k and for BDM_k alike).
PostField stenberg_postprocess(const Mesh& mesh, const CoefficientField& coeff,
                               const FieldVector& sigma_h,
                               const FieldVector& u_h, int flux_index_k,
                               const ScalarField& f,
                               const MomentQuadrature& mq = {});

}  // namespace mixedfem
