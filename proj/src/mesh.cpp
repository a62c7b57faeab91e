#include "mixedfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mixedfem {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Working representation used by the refinement passes. Topology is rebuilt
// from scratch when the result is finalized.
struct WorkMesh {
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> sub;
  std::vector<int> refedge;  // local index of the NVB refinement edge
};

int longest_edge_local(const std::vector<Vec2>& verts,
                       const std::array<int, 3>& t) {
  int best = 0;
  double best_len = -1.0;
  for (int e = 0; e < 3; ++e) {
    const Vec2& p = verts[t[(e + 1) % 3]];
    const Vec2& q = verts[t[(e + 2) % 3]];
    const double len = (q - p).norm();
    if (len > best_len + 1e-15 * (1.0 + best_len)) {
      best_len = len;
      best = e;
    }
  }
  return best;
}

double tri_diameter(const std::vector<Vec2>& verts,
                    const std::array<int, 3>& t) {
  double d = 0.0;
  for (int e = 0; e < 3; ++e)
    d = std::max(d, (verts[t[(e + 1) % 3]] - verts[t[(e + 2) % 3]]).norm());
  return d;
}

std::pair<int, int> edge_key(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Bisects the marked triangles plus whatever closure requires, using
// newest-vertex bisection. Children are emitted counterclockwise and carry
// the NVB refinement-edge labels.
void bisect_marked(WorkMesh& m, const std::vector<char>& marked_tri) {
  const int nt = static_cast<int>(m.tris.size());
  std::map<std::pair<int, int>, char> edge_marked;
  for (int t = 0; t < nt; ++t)
    for (int e = 0; e < 3; ++e)
      edge_marked[edge_key(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3])] = 0;

  for (int t = 0; t < nt; ++t)
    if (marked_tri[t]) {
      const int e = m.refedge[t];
      edge_marked[edge_key(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3])] = 1;
    }

  // Closure: a triangle with any marked edge must have its refinement edge
  // marked, so that the bisection cascade stays conforming.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < nt; ++t) {
      bool any = false;
      for (int e = 0; e < 3; ++e)
        any = any ||
              edge_marked[edge_key(m.tris[t][(e + 1) % 3], m.tris[t][(e + 2) % 3])];
      if (!any) continue;
      const int re = m.refedge[t];
      auto key = edge_key(m.tris[t][(re + 1) % 3], m.tris[t][(re + 2) % 3]);
      if (!edge_marked[key]) {
        edge_marked[key] = 1;
        changed = true;
      }
    }
  }

  std::map<std::pair<int, int>, int> midpoint;
  auto midpoint_of = [&](int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(m.verts.size());
    m.verts.push_back(0.5 * (m.verts[a] + m.verts[b]));
    midpoint.emplace(key, idx);
    return idx;
  };
  auto is_marked = [&](int a, int b) {
    auto it = edge_marked.find(edge_key(a, b));
    return it != edge_marked.end() && it->second;
  };

  std::vector<std::array<int, 3>> out_tris;
  std::vector<int> out_sub, out_refedge;
  // Bisection: split the refinement edge (a,b) at its midpoint mm and connect
  // to the peak p. Children (p,a,mm) and (p,mm,b) get refinement edges
  // opposite the newest vertex mm.
  auto emit = [&](auto&& self, std::array<int, 3> tri, int re, int sub) -> void {
    const int p = tri[re], a = tri[(re + 1) % 3], b = tri[(re + 2) % 3];
    if (!is_marked(a, b)) {
      out_tris.push_back(tri);
      out_refedge.push_back(re);
      out_sub.push_back(sub);
      return;
    }
    const int mm = midpoint_of(a, b);
    self(self, {p, a, mm}, 2, sub);
    self(self, {p, mm, b}, 1, sub);
  };
  for (int t = 0; t < nt; ++t) emit(emit, m.tris[t], m.refedge[t], m.sub[t]);

  m.tris = std::move(out_tris);
  m.sub = std::move(out_sub);
  m.refedge = std::move(out_refedge);
}

double distance_to_work_triangle(const WorkMesh& m, int t, const Vec2& p) {
  const Vec2& a = m.verts[m.tris[t][0]];
  const Vec2& b = m.verts[m.tris[t][1]];
  const Vec2& c = m.verts[m.tris[t][2]];
  if (signed_area(p, a, b) >= 0 && signed_area(p, b, c) >= 0 &&
      signed_area(p, c, a) >= 0)
    return 0.0;
  return std::min({point_segment_distance(p, a, b),
                   point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

Mesh finalize(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> tris,
              std::vector<int> subs, std::vector<int> refedges);

}  // namespace

double Mesh::area(int t) const {
  return signed_area(vertices[triangles[t][0]], vertices[triangles[t][1]],
                     vertices[triangles[t][2]]);
}

Vec2 Mesh::centroid(int t) const {
  return (vertices[triangles[t][0]] + vertices[triangles[t][1]] +
          vertices[triangles[t][2]]) /
         3.0;
}

double Mesh::inradius(int t) const {
  double per = 0.0;
  for (int e = 0; e < 3; ++e)
    per += (vertices[triangles[t][(e + 1) % 3]] -
            vertices[triangles[t][(e + 2) % 3]])
               .norm();
  return 2.0 * area(t) / per;
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < n_triangles(); ++t) s += area(t);
  return s;
}

double Mesh::max_h() const {
  return *std::max_element(h_K.begin(), h_K.end());
}

double Mesh::min_h() const {
  return *std::min_element(h_K.begin(), h_K.end());
}

double Mesh::shape_regularity() const {
  double worst = 0.0;
  for (int t = 0; t < n_triangles(); ++t)
    worst = std::max(worst, h_K[t] / inradius(t));
  return worst;
}

double Mesh::boundary_polygon_area() const {
  // Each boundary edge is traversed in the ccw direction of its only
  // triangle; the shoelace sum then encloses the domain.
  double s = 0.0;
  for (int t = 0; t < n_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const Edge& ed = edges[triangle_to_edges[t][e]];
      if (ed.cls != EdgeClass::Dirichlet) continue;
      const Vec2& p = vertices[triangles[t][(e + 1) % 3]];
      const Vec2& q = vertices[triangles[t][(e + 2) % 3]];
      s += 0.5 * (p.x() * q.y() - q.x() * p.y());
    }
  }
  return s;
}

bool Mesh::triangle_touches_point(int t, const Vec2& p, double tol) const {
  for (int v = 0; v < 3; ++v)
    if ((vertices[triangles[t][v]] - p).norm() <= tol) return true;
  return false;
}

double Mesh::distance_to_triangle(int t, const Vec2& p) const {
  const Vec2& a = vertices[triangles[t][0]];
  const Vec2& b = vertices[triangles[t][1]];
  const Vec2& c = vertices[triangles[t][2]];
  if (signed_area(p, a, b) >= 0 && signed_area(p, b, c) >= 0 &&
      signed_area(p, c, a) >= 0)
    return 0.0;
  return std::min({point_segment_distance(p, a, b),
                   point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

namespace {

Mesh finalize(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> tris,
              std::vector<int> subs, std::vector<int> refedges) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(tris);
  m.subdomain_id = std::move(subs);
  const int nt = m.n_triangles();
  const int nv = m.n_vertices();
  if (static_cast<int>(m.subdomain_id.size()) != nt)
    throw Error("build_mesh: subdomain_ids size mismatch");

  for (int t = 0; t < nt; ++t) {
    for (int v : m.triangles[t])
      if (v < 0 || v >= nv) throw Error("build_mesh: vertex index out of range");
    for (int id : {m.subdomain_id[t]})
      if (id < 0) throw Error("build_mesh: negative subdomain id");
    const double sa = signed_area(m.vertices[m.triangles[t][0]],
                                  m.vertices[m.triangles[t][1]],
                                  m.vertices[m.triangles[t][2]]);
    const double d = tri_diameter(m.vertices, m.triangles[t]);
    if (!(sa > 1e-14 * d * d))
      throw DegenerateTriangle("triangle " + std::to_string(t) +
                               " has zero or negative area");
  }

  // Edge table, in order of first appearance (deterministic).
  std::map<std::pair<int, int>, int> edge_index;
  m.triangle_to_edges.assign(nt, {-1, -1, -1});
  m.triangle_edge_sign.assign(nt, {0, 0, 0});
  for (int t = 0; t < nt; ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = m.triangles[t][(e + 1) % 3];
      const int b = m.triangles[t][(e + 2) % 3];
      auto key = edge_key(a, b);
      auto it = edge_index.find(key);
      int ge;
      if (it == edge_index.end()) {
        ge = m.n_edges();
        Edge ed;
        ed.a = key.first;
        ed.b = key.second;
        ed.tri = {t, -1};
        ed.length = (m.vertices[a] - m.vertices[b]).norm();
        m.edges.push_back(ed);
        edge_index.emplace(key, ge);
      } else {
        ge = it->second;
        Edge& ed = m.edges[ge];
        if (ed.tri[1] != -1)
          throw NonConformingInput("edge (" + std::to_string(key.first) + "," +
                                   std::to_string(key.second) +
                                   ") shared by more than two triangles");
        ed.tri[1] = t;
      }
      m.triangle_to_edges[t][e] = ge;
    }
  }

  // Classification, canonical normals, orientation signs.
  for (Edge& ed : m.edges) {
    ed.cls = ed.tri[1] == -1 ? EdgeClass::Dirichlet : EdgeClass::Interior;
    if (ed.cls == EdgeClass::Interior &&
        m.subdomain_id[ed.tri[0]] != m.subdomain_id[ed.tri[1]])
      ed.interface = true;
  }
  for (int t = 0; t < nt; ++t) {
    for (int e = 0; e < 3; ++e) {
      const int ge = m.triangle_to_edges[t][e];
      Edge& ed = m.edges[ge];
      const Vec2& p = m.vertices[m.triangles[t][(e + 1) % 3]];
      const Vec2& q = m.vertices[m.triangles[t][(e + 2) % 3]];
      const Vec2 tangent = (q - p).normalized();
      const Vec2 outward(tangent.y(), -tangent.x());
      if (ed.tri[0] == t) {
        ed.normal = outward;  // normal leaves the lower-indexed triangle
        m.triangle_edge_sign[t][e] = +1;
      } else {
        m.triangle_edge_sign[t][e] = -1;
      }
    }
  }

  m.h_K.resize(nt);
  for (int t = 0; t < nt; ++t) m.h_K[t] = tri_diameter(m.vertices, m.triangles[t]);
  m.h_F.resize(m.n_edges());
  for (int i = 0; i < m.n_edges(); ++i) m.h_F[i] = m.edges[i].length;

  if (refedges.empty()) {
    m.refinement_edge.resize(nt);
    for (int t = 0; t < nt; ++t)
      m.refinement_edge[t] = longest_edge_local(m.vertices, m.triangles[t]);
  } else {
    m.refinement_edge = std::move(refedges);
  }

  const double tri_sum = m.total_area();
  const double poly = m.boundary_polygon_area();
  if (std::abs(tri_sum - poly) > 1e-12 * std::abs(poly))
    throw NonConformingInput("triangle areas do not add up to the domain area");
  return m;
}

}  // namespace

Mesh build_mesh(std::vector<Vec2> vertices,
                std::vector<std::array<int, 3>> triangles,
                std::vector<int> subdomain_ids) {
  return finalize(std::move(vertices), std::move(triangles),
                  std::move(subdomain_ids), {});
}

Mesh refine(const Mesh& mesh, const RefinementSpec& spec) {
  if (spec.levels < 1) throw Error("refine: levels must be >= 1");

  if (spec.mode == RefinementSpec::Mode::Uniform) {
    Mesh cur = mesh;
    for (int l = 0; l < spec.levels; ++l) {
      std::vector<Vec2> verts = cur.vertices;
      std::vector<int> mid(cur.n_edges());
      for (int i = 0; i < cur.n_edges(); ++i) {
        mid[i] = static_cast<int>(verts.size());
        verts.push_back(0.5 * (cur.vertices[cur.edges[i].a] +
                               cur.vertices[cur.edges[i].b]));
      }
      std::vector<std::array<int, 3>> tris;
      std::vector<int> subs;
      tris.reserve(4 * cur.n_triangles());
      for (int t = 0; t < cur.n_triangles(); ++t) {
        const auto& tv = cur.triangles[t];
        // m[e] is the midpoint of the edge opposite local vertex e.
        std::array<int, 3> mloc;
        for (int e = 0; e < 3; ++e) mloc[e] = mid[cur.triangle_to_edges[t][e]];
        tris.push_back({tv[0], mloc[2], mloc[1]});
        tris.push_back({tv[1], mloc[0], mloc[2]});
        tris.push_back({tv[2], mloc[1], mloc[0]});
        tris.push_back({mloc[0], mloc[1], mloc[2]});
        for (int c = 0; c < 4; ++c) subs.push_back(cur.subdomain_id[t]);
      }
      cur = finalize(std::move(verts), std::move(tris), std::move(subs), {});
    }
    return cur;
  }

  // Graded newest-vertex bisection. Pass j resolves the ball of radius
  // factor^j around the center: triangles meeting the ball are bisected until
  // their diameter drops below the pass radius, closure keeping the mesh
  // conforming.
  if (!(spec.grading_radius_factor > 0.0 && spec.grading_radius_factor < 1.0))
    throw Error("refine: grading_radius_factor must be in (0,1)");
  WorkMesh w{mesh.vertices, mesh.triangles, mesh.subdomain_id,
             mesh.refinement_edge};
  for (int j = 1; j <= spec.levels; ++j) {
    const double r = std::pow(spec.grading_radius_factor, j);
    while (true) {
      std::vector<char> marked(w.tris.size(), 0);
      bool any = false;
      for (int t = 0; t < static_cast<int>(w.tris.size()); ++t) {
        if (tri_diameter(w.verts, w.tris[t]) > r &&
            distance_to_work_triangle(w, t, spec.center) <= r) {
          marked[t] = 1;
          any = true;
        }
      }
      if (!any) break;
      bisect_marked(w, marked);
    }
  }
  return finalize(std::move(w.verts), std::move(w.tris), std::move(w.sub),
                  std::move(w.refedge));
}

Mesh read_mesh(std::istream& in) {
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt)) throw Error("read_mesh: bad header");
  std::vector<Vec2> verts(nv);
  for (int i = 0; i < nv; ++i)
    if (!(in >> verts[i].x() >> verts[i].y()))
      throw Error("read_mesh: bad vertex line " + std::to_string(i));
  std::vector<std::array<int, 3>> tris(nt);
  std::vector<int> subs(nt);
  for (int t = 0; t < nt; ++t)
    if (!(in >> tris[t][0] >> tris[t][1] >> tris[t][2] >> subs[t]))
      throw Error("read_mesh: bad triangle line " + std::to_string(t));
  return build_mesh(std::move(verts), std::move(tris), std::move(subs));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_mesh_file: cannot open " + path);
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << mesh.n_vertices() << " " << mesh.n_triangles() << "\n";
  out.precision(17);
  for (const Vec2& v : mesh.vertices) out << v.x() << " " << v.y() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t)
    out << mesh.triangles[t][0] << " " << mesh.triangles[t][1] << " "
        << mesh.triangles[t][2] << " " << mesh.subdomain_id[t] << "\n";
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_mesh_file: cannot open " + path);
  write_mesh(mesh, out);
}

}  // namespace mixedfem
