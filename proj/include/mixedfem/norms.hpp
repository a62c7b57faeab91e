#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixedfem/coefficients.hpp"
#include "mixedfem/spaces.hpp"

namespace mixedfem {

/// Quadrature control for error norms against (possibly singular) exact
/// solutions: dyadic refinement toward the listed points, default depth 6.
struct NormOptions {
  int quad_order = 10;
  std::vector<Vec2> singular_points;
  int dyadic_depth = 6;
};

/// Per-element error contributions, exportable as CSV
/// "triangle_id, h_K, alpha_K, err_l2_sq, err_div_sq".
struct ElementErrors {
  std::vector<double> err_l2_sq;
  std::vector<double> err_div_sq;
};

/// Summary of the error norms of one solve.
struct NormReport {
  double flux_weighted_l2 = 0.0;   // ||alpha^{-1/2}(sigma - sigma_h)||_0
  double flux_alpha_h = 0.0;       // discrete ||.||_{alpha,h} of a given field
  double flux_hdiv_alpha_h = 0.0;  // ||sigma - sigma_h||_{alpha,h,H(div)}
  double pot_dg = 0.0;             // |||u - u_h|||_{alpha,h}
  ElementErrors per_element;
};

/// A piecewise polynomial scalar field (value and physical gradient as
/// functions of (triangle, reference point)); adapts both D_k coefficient
/// vectors and post-processed fields.
struct PiecewisePolyField {
  int degree = 0;
  std::function<double(int, const Vec2&)> value;
  std::function<Vec2(int, const Vec2&)> gradient;
};

PiecewisePolyField as_piecewise(const Mesh& mesh, const FieldVector& scalar_field);

/// || alpha^{-1/2} (sigma - sigma_h) ||_0 with element-wise quadrature,
/// dyadic toward singular points.
double flux_error_weighted_l2(const Mesh& mesh, const CoefficientField& coeff,
                              const VectorField& exact_sigma,
                              const FieldVector& sigma_h,
                              const NormOptions& opts = {},
                              ElementErrors* breakdown = nullptr);

/// Discrete flux norm ||tau_h||_{alpha,h}^2 = ||alpha^{-1/2} tau_h||^2
/// + sum_F (h_F / alpha_{F,H}) ||tau_h . n||_{0,F}^2 over all edges.
double discrete_flux_norm_alpha_h(const Mesh& mesh,
                                  const CoefficientField& coeff,
                                  const FieldVector& tau_h);

/// |||u - u_field|||_{alpha,h}: broken weighted gradient, interior jumps
/// weighted alpha_{F,H}/h_F, Dirichlet terms alpha_F/h_F with (u_field - g).
double potential_error_dg(const Mesh& mesh, const CoefficientField& coeff,
                          const AnalyticScalarField& exact_u,
                          const PiecewisePolyField& u_field,
                          const ScalarField& g, const NormOptions& opts = {});

/// ||sigma - sigma_h||_{alpha,h,H(div)}; uses f for the exact divergence.
/// The h_K-scaled divergence part alone is returned through div_part when
/// requested.
double flux_error_hdiv_alpha_h(const Mesh& mesh, const CoefficientField& coeff,
                               const VectorField& exact_sigma,
                               const ScalarField& f, const FieldVector& sigma_h,
                               const NormOptions& opts = {},
                               double* div_part = nullptr,
                               ElementErrors* breakdown = nullptr);

void write_element_errors_csv(const Mesh& mesh, const CoefficientField& coeff,
                              const ElementErrors& errors,
                              const std::string& path);

/// Max over elements of sup |div sigma_h - Q_h f| relative to the load scale;
/// the discrete flux is equilibrated when this is ~ solver tolerance.
double equilibration_residual(const Mesh& mesh, const FieldVector& sigma_h,
                              const ScalarField& f, int pot_degree,
                              const MomentQuadrature& mq = {});

}  // namespace mixedfem
