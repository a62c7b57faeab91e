#pragma once

#include <array>
#include <map>
#include <string>

#include "mixedfem/mesh.hpp"
#include "mixedfem/spaces.hpp"

namespace mixedfem {

/// A benchmark: coarse mesh with subdomain layout, coefficient, data, exact
/// solution callables and regularity metadata.
struct ProblemSpec {
  std::string name;
  Mesh initial_mesh;
  std::map<int, double> alpha_by_subdomain;
  ScalarField f;
  ScalarField g;  // Dirichlet data
  bool has_exact = false;
  ScalarField exact_u;
  VectorField exact_grad_u;
  VectorField exact_sigma;
  std::vector<Vec2> singular_points;
  double s_singular = 10.0;  // element regularity near singular points
  double s_regular = 10.0;   // and elsewhere ("smooth": effectively infinite)

  /// s_K policy: low on triangles touching a singular point, high elsewhere.
  double regularity(const Mesh& mesh, int t) const;
};

struct ProblemParams {
  double jump_ratio = 1.0;     // interface_smooth: alpha ratio R
  double kellogg_gamma = 0.5;  // kellogg: singular exponent
};

/// Catalog: "smooth", "interface_smooth", "kellogg".
ProblemSpec get_problem(const std::string& name,
                        const ProblemParams& params = {});

/// Angular factor of the Kellogg checkerboard solution u = r^gamma mu(theta):
/// per quadrant mu = mu_s cos(gamma dtheta) + (dmu_s/gamma) sin(gamma dtheta),
/// glued by continuity of u and of alpha du/dn across the axes. The
/// coefficient is `ratio` in quadrants I and III and 1 in II and IV.
struct KelloggSolution {
  double gamma = 0.5;
  double ratio = 1.0;
  std::array<double, 4> mu_start{};   // mu at theta = 0, pi/2, pi, 3pi/2
  std::array<double, 4> dmu_start{};  // mu' at the sector starts

  double mu(double theta) const;
  double dmu(double theta) const;
  double u(const Vec2& x) const;
  Vec2 grad_u(const Vec2& x) const;
  double alpha_at(const Vec2& x) const;
};

/// Solves the 4-sector transmission system for the given exponent; the
/// returned parameters satisfy all interface conditions to ~1e-12.
KelloggSolution kellogg_constants(double gamma);

}  // namespace mixedfem
