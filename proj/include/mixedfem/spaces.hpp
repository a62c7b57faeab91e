#pragma once

#include <memory>
#include <vector>

#include "mixedfem/elements.hpp"
#include "mixedfem/mesh.hpp"

namespace mixedfem {

/// Global numbering for a space on a mesh. Flux spaces number edge moments
/// first (edge-major, moment order within an edge), then per-triangle
/// interior moments; shared edge DOFs are single global unknowns. Because
/// element bases are built in the canonical edge orientation, the sharing
/// signs are all +1.
struct DofMap {
  SpaceDescriptor space;
  int n_global = 0;
  std::vector<std::vector<int>> local_to_global;   // per triangle
  std::vector<std::vector<double>> signs;          // per triangle, all +1

  int local_size() const { return space.local_dimension(); }
};

std::shared_ptr<const DofMap> build_dofmap(const Mesh& mesh,
                                           const SpaceDescriptor& desc);

/// Coefficient vector over a DofMap.
struct FieldVector {
  std::shared_ptr<const DofMap> dofmap;
  Eigen::VectorXd coeffs;
};

FieldVector zero_field(std::shared_ptr<const DofMap> dofmap);

/// Gathers the local coefficient block of triangle t.
Eigen::VectorXd local_coeffs(const FieldVector& field, int t);

struct AnalyticVectorField {
  VectorField value;
  ScalarField divergence;  // optional unless a consumer needs it
};

struct AnalyticScalarField {
  ScalarField value;
  VectorField gradient;
};

/// Canonical RT/BDM interpolation: coefficients are the DOF moments of the
/// field. Edge moments are computed once per edge in the canonical
/// orientation, so the result is H(div)-conforming by construction.
FieldVector interpolate_flux(const Mesh& mesh, const SpaceDescriptor& desc,
                             const VectorField& field,
                             const MomentQuadrature& mq = {});

/// Element-wise L2 projection onto D_k (local Gram solves).
FieldVector l2_project(const Mesh& mesh, int k, const ScalarField& f,
                       const MomentQuadrature& mq = {});

/// Max over quadrature points of |div(I_h tau) - Q_h(div tau)| with the
/// projection degree matched to the flux family (k for RT_k, k-1 for BDM_k).
double check_commuting(const Mesh& mesh, const SpaceDescriptor& desc,
                       const AnalyticVectorField& field,
                       const MomentQuadrature& mq = {});

// --- field evaluation ------------------------------------------------------

Vec2 evaluate_flux(const Mesh& mesh, const FieldVector& field, int t,
                   const Vec2& ref_point);
double evaluate_flux_div(const Mesh& mesh, const FieldVector& field, int t,
                         const Vec2& ref_point);
/// Scalar fields use the pullback of the reference monomial basis.
double evaluate_scalar(const Mesh& mesh, const FieldVector& field, int t,
                       const Vec2& ref_point);
Vec2 evaluate_scalar_grad(const Mesh& mesh, const FieldVector& field, int t,
                          const Vec2& ref_point);

}  // namespace mixedfem
