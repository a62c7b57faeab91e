#pragma once

#include <Eigen/Sparse>
#include <string>

#include "mixedfem/coefficients.hpp"
#include "mixedfem/spaces.hpp"

namespace mixedfem {

/// Discrete mixed saddle-point system
///   A sigma - B^T u = F_flux,   B sigma = F_pot
/// with A the alpha^{-1}-weighted flux mass matrix, B the divergence
/// coupling (div tau, v), F_flux the Dirichlet boundary load -<g, tau.n>,
/// and F_pot the source load (f, v).
struct SaddleSystem {
  Eigen::SparseMatrix<double> A;  // n_flux x n_flux, SPD
  Eigen::SparseMatrix<double> B;  // n_pot x n_flux
  Eigen::VectorXd F_flux;
  Eigen::VectorXd F_pot;
  std::shared_ptr<const DofMap> flux_dofmap;
  std::shared_ptr<const DofMap> pot_dofmap;
};

/// (RT_k, D_k) and (BDM_{k+1}, D_k) are the stable pairs.
bool is_stable_pair(const SpaceDescriptor& flux_desc, int pot_degree);

SaddleSystem assemble_system(const Mesh& mesh, const CoefficientField& coeff,
                             const SpaceDescriptor& flux_desc, int pot_degree,
                             const ScalarField& f, const ScalarField& g,
                             const MomentQuadrature& mq = {});

/// Debug dump in Matrix Market coordinate format.
void write_matrix_market(const Eigen::SparseMatrix<double>& m,
                         const std::string& path);

}  // namespace mixedfem
