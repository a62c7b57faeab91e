#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixedfem/errors.hpp"

namespace mixedfem {

using Vec2 = Eigen::Vector2d;

enum class EdgeClass { Interior, Dirichlet };

/// One edge of the triangulation. Vertices are stored with a < b; the unit
/// normal points from the lower-indexed incident triangle into the other one
/// (outward on the boundary). Tangent runs from a to b.
struct Edge {
  int a = -1, b = -1;             // vertex indices, a < b
  std::array<int, 2> tri{-1, -1}; // incident triangles, tri[0] < tri[1]
  Vec2 normal = Vec2::Zero();     // canonical unit normal
  double length = 0.0;
  EdgeClass cls = EdgeClass::Interior;
  bool interface = false;         // subdomain ids differ across the edge
};

/// Immutable conforming triangulation with full edge topology.
class Mesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> subdomain_id;
  std::vector<Edge> edges;
  // Local edge e of triangle t is opposite local vertex e, i.e. it joins
  // local vertices e+1 and e+2 (mod 3).
  std::vector<std::array<int, 3>> triangle_to_edges;
  // +1 if the canonical edge normal is outward for this triangle, else -1.
  std::vector<std::array<int, 3>> triangle_edge_sign;
  std::vector<double> h_K;  // triangle diameters
  std::vector<double> h_F;  // edge lengths (same as edges[i].length)
  // Local index of the refinement edge used by newest-vertex bisection.
  std::vector<int> refinement_edge;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  double area(int t) const;
  Vec2 centroid(int t) const;
  double inradius(int t) const;
  double total_area() const;
  double max_h() const;
  double min_h() const;
  /// Worst h_K / inradius ratio over all triangles.
  double shape_regularity() const;
  /// Area enclosed by the boundary edges (independent of the triangle sum).
  double boundary_polygon_area() const;
  /// True if vertex v is one of the corners of triangle t.
  bool triangle_touches_point(int t, const Vec2& p, double tol = 1e-12) const;
  /// Distance from p to triangle t (0 if p lies inside).
  double distance_to_triangle(int t, const Vec2& p) const;
};

struct RefinementSpec {
  enum class Mode { Uniform, GradedBisection };
  Mode mode = Mode::Uniform;
  Vec2 center = Vec2::Zero();          // graded mode only
  int levels = 1;
  double grading_radius_factor = 0.5;  // graded mode: pass j targets radius factor^j
};

/// Builds edge topology and validates conformity. Boundary edges are
/// classified Dirichlet (the whole boundary carries Dirichlet data).
Mesh build_mesh(std::vector<Vec2> vertices,
                std::vector<std::array<int, 3>> triangles,
                std::vector<int> subdomain_ids);

Mesh refine(const Mesh& mesh, const RefinementSpec& spec);

/// Plain-text node/element format: "nv nt", nv lines "x y",
/// nt lines "i j k subdomain_id" (0-based).
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh_file(const Mesh& mesh, const std::string& path);

}  // namespace mixedfem
