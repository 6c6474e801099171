/**
 * @file analysis.hpp
 * @brief Error norms of a discrete solution, the continuous displacement recovered
 * from the trace unknowns, and experimental orders of convergence.
 */
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nnelast/assembly.hpp"
#include "nnelast/element.hpp"
#include "nnelast/problem.hpp"
#include "nnelast/quadrature.hpp"
#include "nnelast/spaces.hpp"

namespace nnelast {

/// Continuous piecewise linear displacement with the trace unknowns as nodal values.
struct RecoveredDisplacement {
  std::vector<Vec2> nodal;

  Vec2 value(const Triangulation& mesh, int t, const Barycentric& l) const {
    const Triangle& tri = mesh.triangle(t);
    return l[0] * nodal[tri.v[0]] + l[1] * nodal[tri.v[1]] + l[2] * nodal[tri.v[2]];
  }
  /// Constant strain on triangle t: sum_j sym(eta_j (x) grad l_j).
  SymTensor2 strain(const Triangulation& mesh, int t) const {
    const ElementGeometry g = element_geometry(mesh, t);
    const Triangle& tri = mesh.triangle(t);
    SymTensor2 e;
    for (int j = 0; j < 3; ++j) e += sym_outer(nodal[tri.v[j]], g.grad_lambda(j));
    return e;
  }
};

inline RecoveredDisplacement recover_displacement(const DofMap& dm, const Eigen::VectorXd& x) {
  RecoveredDisplacement r;
  r.nodal.resize(dm.num_vertices);
  for (int v = 0; v < dm.num_vertices; ++v) r.nodal[v] = {x(dm.trace_dof(v, 0)), x(dm.trace_dof(v, 1))};
  return r;
}

/// Discontinuous displacement u_h on triangle t at barycentric point l.
inline Vec2 displacement_value(const DofMap& dm, const Eigen::VectorXd& x, int t, const Barycentric& l) {
  Vec2 u;
  for (int j = 0; j < 3; ++j) u += l[j] * Vec2{x(dm.displacement_dof(t, j, 0)), x(dm.displacement_dof(t, j, 1))};
  return u;
}

/// Absolute L2-type errors.
struct FieldErrors {
  double sigma{0.0};   ///< ||sigma - sigma_h||
  double div{0.0};     ///< ||div(sigma - sigma_h)||_T
  double u{0.0};       ///< ||u - u_h||
  double strain{0.0};  ///< ||eps(u) - eps(u~_h)||

  double total() const { return std::sqrt(sigma * sigma + div * div + u * u + strain * strain); }
};

/// Errors by elementwise quadrature (7-point rule unless overridden). The stress
/// block of x is used as given; apply corrected_stress beforehand where wanted.
inline FieldErrors compute_errors(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x,
                                  const ManufacturedProblem& p, const TriangleRule& rule = triangle_rule_7pt(),
                                  unsigned threads = 0) {
  const RecoveredDisplacement ut = recover_displacement(dm, x);
  std::vector<std::array<double, 4>> part(dm.num_triangles);
  parallel_for(static_cast<std::size_t>(dm.num_triangles), thread_count(threads), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const LocalStress sh = local_stress(mesh, dm, x, t);
    const SymTensor2 eh = ut.strain(mesh, t);
    std::array<double, 4> acc{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Barycentric& l = rule.points[q];
      const Vec2 y = sh.geometry.point(l);
      const double w = rule.weights[q] * sh.geometry.area();
      const SymTensor2 ds = p.sigma(y) - sh(y);
      const Vec2 dd = p.div_sigma(y) - sh.divergence(y);
      const Vec2 du = p.u(y) - displacement_value(dm, x, t, l);
      const SymTensor2 de = p.strain(y) - eh;
      acc[0] += w * frobenius(ds, ds);
      acc[1] += w * dot(dd, dd);
      acc[2] += w * dot(du, du);
      acc[3] += w * frobenius(de, de);
    }
    part[ti] = acc;
  });
  std::array<double, 4> sum{};
  for (const auto& a : part)
    for (int k = 0; k < 4; ++k) sum[k] += a[k];
  return {std::sqrt(sum[0]), std::sqrt(sum[1]), std::sqrt(sum[2]), std::sqrt(sum[3])};
}

/// (||u||_1^2 + ||sigma||_div^2)^{1/2} with ||u||_1^2 = ||u||^2 + ||grad u||^2.
inline double exact_solution_norm(const Triangulation& mesh, const ManufacturedProblem& p,
                                  const TriangleRule& rule = triangle_rule_collapsed(6)) {
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 y = g.point(rule.points[q]);
      const double w = rule.weights[q] * g.area();
      const Vec2 u = p.u(y);
      const Mat2 G = p.grad_u(y);
      const SymTensor2 s = p.sigma(y);
      const Vec2 d = p.div_sigma(y);
      sum += w * (dot(u, u) + G.a11 * G.a11 + G.a12 * G.a12 + G.a21 * G.a21 + G.a22 * G.a22 + frobenius(s, s) +
                  dot(d, d));
    }
  }
  return std::sqrt(sum);
}

/// EOC_i = log(e_{i-1} / e_i) / log(h_{i-1} / h_i); undefined for the first entry and
/// wherever an error vanishes or is not finite.
inline std::vector<std::optional<double>> eoc(const std::vector<double>& h, const std::vector<double>& e) {
  std::vector<std::optional<double>> r(e.size());
  for (std::size_t i = 1; i < e.size() && i < h.size(); ++i) {
    const bool ok = e[i - 1] > 0.0 && e[i] > 0.0 && std::isfinite(e[i - 1]) && std::isfinite(e[i]) && h[i - 1] != h[i];
    if (ok) r[i] = std::log(e[i - 1] / e[i]) / std::log(h[i - 1] / h[i]);
  }
  return r;
}

}  // namespace nnelast
