#pragma once

#include <map>
#include <vector>

#include "mixedfem/mesh.hpp"

namespace mixedfem {

/// Piecewise-constant diffusion coefficient on the subdomains of a mesh,
/// with the derived per-triangle values and per-edge harmonic averages.
struct CoefficientField {
  std::map<int, double> alpha_by_subdomain;
  std::vector<double> alpha_by_triangle;
  // Interior edges: harmonic average of the two incident values; Dirichlet
  // edges: the single incident value.
  std::vector<double> alpha_harmonic_by_edge;
};

/// a+ a- / (a+ + a-); symmetric, between min/2 and min of the arguments.
double harmonic_average(double a_plus, double a_minus);

CoefficientField build_coefficient(const Mesh& mesh,
                                   const std::map<int, double>& alpha_by_subdomain);

}  // namespace mixedfem
