#include "mixedfem/coefficients.hpp"

#include <string>

namespace mixedfem {

double harmonic_average(double a_plus, double a_minus) {
  if (!(a_plus > 0.0) || !(a_minus > 0.0))
    throw NonPositiveCoefficient("harmonic_average: arguments must be > 0");
  return a_plus * a_minus / (a_plus + a_minus);
}

CoefficientField build_coefficient(
    const Mesh& mesh, const std::map<int, double>& alpha_by_subdomain) {
  for (const auto& [id, a] : alpha_by_subdomain)
    if (!(a > 0.0))
      throw NonPositiveCoefficient("alpha for subdomain " + std::to_string(id));

  CoefficientField c;
  c.alpha_by_subdomain = alpha_by_subdomain;
  c.alpha_by_triangle.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto it = alpha_by_subdomain.find(mesh.subdomain_id[t]);
    if (it == alpha_by_subdomain.end())
      throw MissingSubdomain("no alpha for subdomain " +
                             std::to_string(mesh.subdomain_id[t]));
    c.alpha_by_triangle[t] = it->second;
  }
  c.alpha_harmonic_by_edge.resize(mesh.n_edges());
  for (int i = 0; i < mesh.n_edges(); ++i) {
    const Edge& ed = mesh.edges[i];
    c.alpha_harmonic_by_edge[i] =
        ed.cls == EdgeClass::Dirichlet
            ? c.alpha_by_triangle[ed.tri[0]]
            : harmonic_average(c.alpha_by_triangle[ed.tri[0]],
                               c.alpha_by_triangle[ed.tri[1]]);
  }
  return c;
}

}  // namespace mixedfem
