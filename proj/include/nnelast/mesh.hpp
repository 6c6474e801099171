/**
 * @file mesh.hpp
 * @brief Conforming triangulations with oriented edges and boundary tags.
 *
 * Conventions:
 *  - triangles are stored counterclockwise; local edge i is opposite local vertex i,
 *    i.e. it joins v[(i+1)%3] and v[(i+2)%3];
 *  - every edge stores its endpoints with the lower vertex id first, the unit tangent
 *    t pointing from the lower to the higher id and the unit normal n = rotate_cw(t),
 *    flipped on boundary edges so that it is exterior.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nnelast/tensor.hpp"

namespace nnelast {

/// Boundary condition type of a boundary piece: hard clamped, soft clamped,
/// simply supported, stress free.
enum class BoundaryTag { hc, sc, ss, sf };

inline std::string to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::hc: return "hc";
    case BoundaryTag::sc: return "sc";
    case BoundaryTag::ss: return "ss";
    case BoundaryTag::sf: return "sf";
  }
  return "?";
}

struct Vertex {
  int id{0};
  Vec2 x;
};

struct Edge {
  int id{0};
  std::array<int, 2> v{};          ///< v[0] < v[1]
  Vec2 t;                          ///< from v[0] to v[1]
  Vec2 n;                          ///< exterior on the boundary
  double length{0.0};
  std::array<int, 2> adjacent{-1, -1};
  std::optional<BoundaryTag> tag;  ///< set on boundary edges only

  bool is_boundary() const { return adjacent[1] < 0; }
};

struct Triangle {
  int id{0};
  std::array<int, 3> v{};  ///< counterclockwise
  std::array<int, 3> e{};  ///< e[i] opposite v[i]
};

/// Affine map x = B xhat + a from the reference triangle with vertices
/// (0,1), (0,0), (1,0) onto a triangle in local vertex order.
struct AffineMap {
  Mat2 B = Mat2::identity();
  Vec2 a;
  double J{1.0};

  Vec2 operator()(const Vec2& xhat) const { return B * xhat + a; }
  Vec2 inverse(const Vec2& x) const { return B.inverse() * (x - a); }

  static AffineMap from_vertices(const std::array<Vec2, 3>& x) {
    AffineMap m;
    m.a = x[1];
    m.B = Mat2::from_columns(x[2] - x[1], x[0] - x[1]);
    m.J = m.B.det();
    if (m.J == 0.0) throw std::domain_error("affine map of a degenerate triangle");
    return m;
  }
};

inline const std::array<Vec2, 3>& reference_vertices() {
  static const std::array<Vec2, 3> v{Vec2{0.0, 1.0}, Vec2{0.0, 0.0}, Vec2{1.0, 0.0}};
  return v;
}

class Triangulation {
 public:
  Triangulation() = default;

  /// Builds edges and adjacency from vertex coordinates and triangle connectivity.
  /// Clockwise triangles are reoriented.
  Triangulation(std::vector<Vec2> coords, std::vector<std::array<int, 3>> cells, int level = 0)
      : level_(level) {
    vertices_.reserve(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) vertices_.push_back({static_cast<int>(i), coords[i]});

    std::map<std::pair<int, int>, int> edge_index;
    triangles_.reserve(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      Triangle tri;
      tri.id = static_cast<int>(k);
      tri.v = cells[k];
      const double area2 = cross(x(tri.v[1]) - x(tri.v[0]), x(tri.v[2]) - x(tri.v[0]));
      if (area2 == 0.0) throw std::domain_error("degenerate triangle " + std::to_string(k));
      if (area2 < 0.0) std::swap(tri.v[1], tri.v[2]);
      for (int i = 0; i < 3; ++i) {
        int a = tri.v[(i + 1) % 3], b = tri.v[(i + 2) % 3];
        if (a > b) std::swap(a, b);
        auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(edges_.size()));
        if (inserted) {
          Edge e;
          e.id = it->second;
          e.v = {a, b};
          const Vec2 d = x(b) - x(a);
          e.length = norm(d);
          e.t = d / e.length;
          e.n = rotate_cw(e.t);
          e.adjacent[0] = tri.id;
          edges_.push_back(e);
        } else {
          Edge& e = edges_[it->second];
          if (e.adjacent[1] >= 0) throw std::domain_error("non-manifold edge in triangulation");
          e.adjacent[1] = tri.id;
        }
        tri.e[i] = it->second;
      }
      triangles_.push_back(tri);
    }

    for (Edge& e : edges_) {
      if (!e.is_boundary()) continue;
      const Triangle& tri = triangles_[e.adjacent[0]];
      int opposite = -1;
      for (int i = 0; i < 3; ++i)
        if (tri.e[i] == e.id) opposite = tri.v[i];
      const Vec2 mid = 0.5 * (x(e.v[0]) + x(e.v[1]));
      if (dot(e.n, x(opposite) - mid) > 0.0) e.n = -e.n;
    }

    h_ = 0.0;
    for (const Triangle& tri : triangles_)
      for (int i = 0; i < 3; ++i) h_ = std::max(h_, edges_[tri.e[i]].length);
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Vec2& x(int vertex) const { return vertices_[vertex].x; }
  const Edge& edge(int id) const { return edges_[id]; }
  const Triangle& triangle(int id) const { return triangles_[id]; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  /// Maximal triangle diameter.
  double h() const { return h_; }
  int level() const { return level_; }

  std::array<Vec2, 3> coords(int tri) const {
    const Triangle& t = triangles_[tri];
    return {x(t.v[0]), x(t.v[1]), x(t.v[2])};
  }
  double area(int tri) const {
    const auto c = coords(tri);
    return 0.5 * cross(c[1] - c[0], c[2] - c[0]);
  }
  double total_area() const {
    double a = 0.0;
    for (std::size_t k = 0; k < triangles_.size(); ++k) a += area(static_cast<int>(k));
    return a;
  }

  /// Whether the global edge parameter of local edge i runs against the local
  /// direction v[i+1] -> v[i+2].
  bool edge_flipped(int tri, int i) const {
    const Triangle& t = triangles_[tri];
    return t.v[(i + 1) % 3] > t.v[(i + 2) % 3];
  }

  /// Assigns a tag to every boundary edge.
  void tag_boundary(const std::function<BoundaryTag(const Edge&, const Vec2& midpoint)>& tagger) {
    for (Edge& e : edges_)
      if (e.is_boundary()) e.tag = tagger(e, 0.5 * (x(e.v[0]) + x(e.v[1])));
  }

  bool has_tag(BoundaryTag tag) const {
    return std::any_of(edges_.begin(), edges_.end(), [tag](const Edge& e) { return e.tag == tag; });
  }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<Triangle> triangles_;
  double h_{0.0};
  int level_{0};
};

/// Affine map onto triangle t in its local vertex order.
inline AffineMap affine_map(const Triangulation& mesh, int t) {
  return AffineMap::from_vertices(mesh.coords(t));
}

/// Boundary tags of the four sides of an axis-parallel rectangle.
struct SideTags {
  BoundaryTag bottom{BoundaryTag::hc};
  BoundaryTag right{BoundaryTag::hc};
  BoundaryTag top{BoundaryTag::hc};
  BoundaryTag left{BoundaryTag::hc};

  static SideTags all(BoundaryTag t) { return {t, t, t, t}; }
};

namespace detail {

/// Uniform grid over [x0, x0 + nx/n] x [y0, y0 + ny/n] restricted to the cells
/// accepted by `keep`; every cell is split along its (i, j) -> (i+1, j+1) diagonal.
inline Triangulation structured_mesh(double x0, double y0, int nx, int ny, double step,
                                     const std::function<bool(int, int)>& keep) {
  const int sx = nx + 1;
  std::vector<int> id((nx + 1) * (ny + 1), -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (keep(i, j))
        for (int dj = 0; dj <= 1; ++dj)
          for (int di = 0; di <= 1; ++di) id[(j + dj) * sx + i + di] = 0;
  std::vector<Vec2> coords;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (id[j * sx + i] == 0) {
        id[j * sx + i] = static_cast<int>(coords.size());
        coords.push_back({x0 + i * step, y0 + j * step});
      }
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!keep(i, j)) continue;
      const int a = id[j * sx + i], b = id[j * sx + i + 1];
      const int c = id[(j + 1) * sx + i + 1], d = id[(j + 1) * sx + i];
      cells.push_back({a, b, c});
      cells.push_back({a, c, d});
    }
  return Triangulation(std::move(coords), std::move(cells));
}

}  // namespace detail

/// Unit square split into n x n cells, 2 n^2 triangles.
inline Triangulation build_unit_square_mesh(int n, const SideTags& tags = {}) {
  if (n < 1) throw std::invalid_argument("build_unit_square_mesh: n must be >= 1");
  Triangulation mesh = detail::structured_mesh(0.0, 0.0, n, n, 1.0 / n, [](int, int) { return true; });
  const double tol = 0.25 / n;
  mesh.tag_boundary([&](const Edge&, const Vec2& m) {
    if (m.y < tol) return tags.bottom;
    if (m.x > 1.0 - tol) return tags.right;
    if (m.y > 1.0 - tol) return tags.top;
    return tags.left;
  });
  return mesh;
}

/// L-shaped domain (-1,1)^2 minus [0,1) x (-1,0], three unit squares with n x n
/// cells each; every boundary edge is hard clamped.
inline Triangulation build_lshape_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_lshape_mesh: n must be >= 1");
  Triangulation mesh = detail::structured_mesh(-1.0, -1.0, 2 * n, 2 * n, 1.0 / n,
                                               [n](int i, int j) { return !(i >= n && j < n); });
  mesh.tag_boundary([](const Edge&, const Vec2&) { return BoundaryTag::hc; });
  return mesh;
}

/// Red refinement: each triangle is split into four congruent children through its
/// edge midpoints. Boundary tags are inherited from the parent edges.
inline Triangulation refine_uniform(const Triangulation& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  std::vector<Vec2> coords;
  coords.reserve(nv + mesh.num_edges());
  for (const Vertex& v : mesh.vertices()) coords.push_back(v.x);
  for (const Edge& e : mesh.edges()) coords.push_back(0.5 * (mesh.x(e.v[0]) + mesh.x(e.v[1])));

  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.num_triangles());
  for (const Triangle& t : mesh.triangles()) {
    const int a = t.v[0], b = t.v[1], c = t.v[2];
    const int ma = nv + t.e[0], mb = nv + t.e[1], mc = nv + t.e[2];
    cells.push_back({a, mc, mb});
    cells.push_back({mc, b, ma});
    cells.push_back({mb, ma, c});
    cells.push_back({ma, mb, mc});
  }
  Triangulation fine(std::move(coords), std::move(cells), mesh.level() + 1);
  fine.tag_boundary([&](const Edge& e, const Vec2&) {
    // exactly one endpoint of a child boundary edge is a parent edge midpoint
    const int mid = std::max(e.v[0], e.v[1]);
    const auto& parent = mesh.edge(mid - nv);
    if (!parent.tag) throw std::logic_error("refine_uniform: untagged parent boundary edge");
    return *parent.tag;
  });
  return fine;
}

/// Debug dump of a triangulation. Schema "nnelast.mesh/1".
inline nlohmann::json mesh_to_json(const Triangulation& mesh) {
  nlohmann::json j;
  j["schema"] = "nnelast.mesh/1";
  j["level"] = mesh.level();
  j["h"] = mesh.h();
  auto& vs = j["vertices"] = nlohmann::json::array();
  for (const Vertex& v : mesh.vertices()) vs.push_back({v.x.x, v.x.y});
  auto& ts = j["triangles"] = nlohmann::json::array();
  for (const Triangle& t : mesh.triangles()) ts.push_back({t.v[0], t.v[1], t.v[2]});
  auto& es = j["edges"] = nlohmann::json::array();
  for (const Edge& e : mesh.edges()) {
    nlohmann::json je;
    je["v"] = {e.v[0], e.v[1]};
    je["adjacent"] = e.is_boundary() ? nlohmann::json::array({e.adjacent[0]})
                                     : nlohmann::json::array({e.adjacent[0], e.adjacent[1]});
    je["tag"] = e.tag ? nlohmann::json(to_string(*e.tag)) : nlohmann::json(nullptr);
    es.push_back(std::move(je));
  }
  return j;
}

}  // namespace nnelast
