#pragma once

#include "mixedfem/assembly.hpp"

namespace mixedfem {

/// One row of an inf-sup / norm-equivalence sweep
/// ("level, n_flux, n_pot, alpha_ratio, beta, C_equiv").
struct SpectralReport {
  int level = 0;
  double alpha_ratio = 1.0;
  int n_flux = 0;
  int n_pot = 0;
  double beta = 0.0;
  double c_equiv = 1.0;
};

struct InfSupSpectrum {
  double beta = 0.0;        // smallest generalized singular value
  double continuity = 0.0;  // largest (the continuity constant C_con1)
};

/// Smallest/largest generalized eigenvalues of (B M^{-1} B^T) x = lambda N x,
/// with M the alpha^{-1}-weighted flux mass matrix and N the Gram matrix of
/// the weighted DG norm on D_k. Dense below ~2000 potential DOFs, power
/// iteration above.
InfSupSpectrum infsup_spectrum(const Mesh& mesh, const CoefficientField& coeff,
                               const SpaceDescriptor& flux_desc,
                               int pot_degree);

double infsup_constant(const Mesh& mesh, const CoefficientField& coeff,
                       const SpaceDescriptor& flux_desc, int pot_degree);

/// Same beta through the dual route: smallest eigenvalue of the pencil
/// (S N^{-1} S, S) over the orthogonal complement parametrization
/// tau = M^{-1} B^T w. Agrees with infsup_constant up to solver tolerance.
double infsup_constant_dual(const Mesh& mesh, const CoefficientField& coeff,
                            const SpaceDescriptor& flux_desc, int pot_degree);

/// sqrt of the largest eigenvalue of G x = lambda M x where G is the Gram
/// matrix of the discrete ||.||_{alpha,h} flux norm; >= 1 by construction.
double norm_equivalence_constant(const Mesh& mesh,
                                 const CoefficientField& coeff,
                                 const SpaceDescriptor& flux_desc);

}  // namespace mixedfem
