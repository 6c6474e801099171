/**
 * @file spaces.hpp
 * @brief Global numbering of the stress, displacement and trace unknowns, and the
 * Dirichlet constraints on the trace unknowns.
 *
 * Ordering of the full unknown vector: stress edge moments (2 per edge), stress
 * interior moments (9 per triangle), displacement (6 per triangle, l_j e_d at
 * 2 j + d), trace (2 per vertex, Cartesian components).
 */
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnelast/element.hpp"
#include "nnelast/mesh.hpp"
#include "nnelast/problem.hpp"

namespace nnelast {

struct DofMap {
  int num_vertices{0};
  int num_edges{0};
  int num_triangles{0};

  explicit DofMap(const Triangulation& mesh)
      : num_vertices(static_cast<int>(mesh.num_vertices())),
        num_edges(static_cast<int>(mesh.num_edges())),
        num_triangles(static_cast<int>(mesh.num_triangles())) {}

  int stress_size() const { return 2 * num_edges + 9 * num_triangles; }
  int displacement_size() const { return kDisplacementDofs * num_triangles; }
  int trace_size() const { return 2 * num_vertices; }
  int total() const { return stress_size() + displacement_size() + trace_size(); }

  int displacement_offset() const { return stress_size(); }
  int trace_offset() const { return stress_size() + displacement_size(); }

  int edge_dof(int edge, int k) const { return 2 * edge + k; }
  int interior_stress_dof(int tri, int k) const { return 2 * num_edges + 9 * tri + k; }
  int displacement_dof(int tri, int j, int d) const { return displacement_offset() + kDisplacementDofs * tri + 2 * j + d; }
  int trace_dof(int vertex, int d) const { return trace_offset() + 2 * vertex + d; }

  /// Global indices of the 15 local stress DOFs of a triangle.
  std::array<int, kStressDofs> stress_dofs(const Triangulation& mesh, int tri) const {
    std::array<int, kStressDofs> g{};
    const Triangle& t = mesh.triangle(tri);
    for (int i = 0; i < 3; ++i) {
      g[2 * i] = edge_dof(t.e[i], 0);
      g[2 * i + 1] = edge_dof(t.e[i], 1);
    }
    for (int k = 0; k < 9; ++k) g[6 + k] = interior_stress_dof(tri, k);
    return g;
  }
};

inline DofMap build_dof_map(const Triangulation& mesh) { return DofMap(mesh); }

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraints on the trace vector at one vertex. With rank 1 the admissible set
/// is value + s * free_direction; with rank 2 the vertex value is fixed.
struct VertexConstraint {
  int rank{0};
  Vec2 value;           ///< particular solution
  Vec2 free_direction;  ///< unit vector, rank 1 only
};

struct ConstraintSet {
  std::vector<VertexConstraint> vertices;

  int num_constrained_scalars() const {
    int c = 0;
    for (const auto& v : vertices) c += v.rank;
    return c;
  }
};

namespace detail {

struct ScalarConstraint {
  Vec2 direction;
  double value;
};

inline VertexConstraint reduce_constraints(int vertex, const std::vector<ScalarConstraint>& raw) {
  std::vector<ScalarConstraint> kept;
  double scale = 1.0;
  for (const auto& c : raw) scale = std::max(scale, std::abs(c.value));
  const double tol = 1e-10 * scale;
  for (const ScalarConstraint& c : raw) {
    bool duplicate = false;
    for (const ScalarConstraint& k : kept) {
      if (std::abs(cross(k.direction, c.direction)) > 1e-12) continue;
      // parallel: values must agree up to the orientation of the direction
      const double sign = dot(k.direction, c.direction) > 0 ? 1.0 : -1.0;
      if (std::abs(k.value - sign * c.value) > tol)
        throw ConstraintError("inconsistent boundary constraints at vertex " + std::to_string(vertex));
      duplicate = true;
      break;
    }
    if (!duplicate) kept.push_back(c);
  }
  VertexConstraint vc;
  if (kept.empty()) return vc;
  if (kept.size() == 1) {
    vc.rank = 1;
    vc.value = kept[0].value * kept[0].direction;
    vc.free_direction = rotate_cw(kept[0].direction);
    return vc;
  }
  // two or more independent directions: least squares, accepted only if consistent
  Eigen::MatrixXd M(kept.size(), 2);
  Eigen::VectorXd b(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    M(k, 0) = kept[k].direction.x;
    M(k, 1) = kept[k].direction.y;
    b(k) = kept[k].value;
  }
  const Eigen::Vector2d x = M.colPivHouseholderQr().solve(b);
  if ((M * x - b).norm() > tol)
    throw ConstraintError("over-determined and inconsistent boundary constraints at vertex " + std::to_string(vertex));
  vc.rank = 2;
  vc.value = {x(0), x(1)};
  return vc;
}

}  // namespace detail

/// Constraints from the nodal interpolant of the Dirichlet data: hc fixes both
/// components, sc the normal one, ss the tangential one. A vertex shared by
/// several sides receives the union of their constraints, each in its own side frame.
inline ConstraintSet boundary_constraints(const Triangulation& mesh, const BoundaryData& data) {
  std::vector<std::vector<detail::ScalarConstraint>> raw(mesh.num_vertices());
  for (const Edge& e : mesh.edges()) {
    if (!e.is_boundary()) continue;
    if (!e.tag) throw ConstraintError("boundary edge " + std::to_string(e.id) + " has no tag");
    for (int v : e.v) {
      const Vec2& x = mesh.x(v);
      switch (*e.tag) {
        case BoundaryTag::hc: {
          if (!data.g_D) throw ConstraintError("missing hard clamped data g_D");
          const Vec2 g = data.g_D(x);
          raw[v].push_back({{1.0, 0.0}, g.x});
          raw[v].push_back({{0.0, 1.0}, g.y});
          break;
        }
        case BoundaryTag::sc:
          if (!data.g_Dn) throw ConstraintError("missing soft clamped data g_Dn");
          raw[v].push_back({e.n, data.g_Dn(x, e.n)});
          break;
        case BoundaryTag::ss:
          if (!data.g_Dt) throw ConstraintError("missing simply supported data g_Dt");
          raw[v].push_back({e.t, data.g_Dt(x, e.t)});
          break;
        case BoundaryTag::sf: break;
      }
    }
  }
  ConstraintSet cs;
  cs.vertices.resize(mesh.num_vertices());
  for (std::size_t v = 0; v < raw.size(); ++v) cs.vertices[v] = detail::reduce_constraints(static_cast<int>(v), raw[v]);
  return cs;
}

}  // namespace nnelast
