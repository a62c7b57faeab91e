#pragma once

#include <string>

#include "mixedfem/assembly.hpp"

namespace mixedfem {

enum class SolveMethod { Schur, Direct };

struct SolveReport {
  FieldVector flux;       // sigma_h
  FieldVector potential;  // u_h
  double residual_norm = 0.0;  // relative, on the full block system
  std::string method;
  double wall_time_s = 0.0;
};

/// Solves the saddle system to a relative block residual <= tol.
/// Schur: Cholesky of A plus conjugate gradients on B A^{-1} B^T.
/// Direct: sparse LU of the symmetric block matrix [[A, B^T], [B, 0]].
SolveReport solve_saddle(const SaddleSystem& system, double tol,
                         SolveMethod method = SolveMethod::Schur);

}  // namespace mixedfem
