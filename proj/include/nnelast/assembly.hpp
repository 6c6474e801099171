/**
 * @file assembly.hpp
 * @brief Saddle-point system for (stress, displacement, trace), Dirichlet elimination,
 * global interpolation and the constant correction tensors of the pure Dirichlet case.
 *
 * Block structure of the full system, in the DofMap ordering:
 *
 *   [ A   B1^T  B2^T ] [sigma]   [ 0        ]
 *   [ B1  0     0    ] [u    ] = [ -(f, v)  ]
 *   [ B2  0     0    ] [eta  ]   [ -<v, g>_N ]
 *
 * with A = (compliance sigma, tau), B1 = (v, div tau)_T and
 * B2 = -sum_T sum_e <v, tau n>_e for continuous piecewise linear v.
 */
#pragma once

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nnelast/element.hpp"
#include "nnelast/material.hpp"
#include "nnelast/mesh.hpp"
#include "nnelast/problem.hpp"
#include "nnelast/quadrature.hpp"
#include "nnelast/solver.hpp"
#include "nnelast/spaces.hpp"

namespace nnelast {

/// Worker count: the explicit request if nonzero, else NN_ELAST_THREADS, else the
/// hardware concurrency. NN_ELAST_THREADS caps every request.
inline unsigned thread_count(unsigned requested = 0) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned cap = hw;
  if (const char* env = std::getenv("NN_ELAST_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = static_cast<unsigned>(v);
  }
  return std::max(1u, std::min(requested == 0 ? hw : requested, cap));
}

/// Static block partition of [0, n) over the workers; fn(i) must only write slot i.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

struct AssemblyOptions {
  const TriangleRule* load_rule = &triangle_rule_3pt();
  unsigned threads = 0;  ///< 0: see thread_count()
  /// Insertion order of the element contributions; empty means 0..T-1.
  std::vector<int> element_order;
};

using Matrix6x15 = Eigen::Matrix<double, 6, kStressDofs>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Element matrices in the nodal stress basis; rows 2 j + d of B1, B2 and load
/// belong to l_j e_d.
struct LocalSystem {
  Matrix15 A;
  Matrix6x15 B1;
  Matrix6x15 B2;
  Vector6 load;
};

inline LocalSystem local_system(const ElementGeometry& g, const Material& m, const std::function<Vec2(const Vec2&)>& f,
                                const TriangleRule& load_rule) {
  const StressElement el(g);
  Matrix15 gram = Matrix15::Zero();
  Matrix6x15 div = Matrix6x15::Zero(), trace = Matrix6x15::Zero();

  const TriangleRule& er = triangle_rule_7pt();
  for (std::size_t q = 0; q < er.size(); ++q) {
    const Barycentric& l = er.points[q];
    const Vec2 p = g.point(l);
    const double w = er.weights[q] * g.area();
    const BasisValues b = eval_basis(g, p);
    const BasisDivergences db = eval_basis_div(g, p);
    BasisValues ab;
    for (int k = 0; k < kStressDofs; ++k) ab[k] = apply_compliance(m, b[k]);
    for (int a = 0; a < kStressDofs; ++a)
      for (int c = a; c < kStressDofs; ++c) gram(a, c) += w * frobenius(ab[a], b[c]);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < kStressDofs; ++k) {
        div(2 * j, k) += w * l[j] * db[k].x;
        div(2 * j + 1, k) += w * l[j] * db[k].y;
      }
  }
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();

  static const EdgeRule edge = gauss_legendre(2);
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = g.vertex((i + 1) % 3), c = g.vertex((i + 2) % 3);
    for (std::size_t q = 0; q < edge.size(); ++q) {
      const Vec2 p = a + edge.points[q] * (c - a);
      const double w = edge.weights[q] * g.edge_length(i);
      const Barycentric l = g.barycentric(p);
      const BasisValues b = eval_basis(g, p);
      for (int k = 0; k < kStressDofs; ++k) {
        const Vec2 tn = b[k] * g.normal(i);
        for (int j = 0; j < 3; ++j) {
          trace(2 * j, k) -= w * l[j] * tn.x;
          trace(2 * j + 1, k) -= w * l[j] * tn.y;
        }
      }
    }
  }

  LocalSystem s;
  s.A = el.dual().transpose() * gram * el.dual();
  s.A = 0.5 * (s.A + s.A.transpose()).eval();
  s.B1 = div * el.dual();
  s.B2 = trace * el.dual();
  s.load.setZero();
  for (std::size_t q = 0; q < load_rule.size(); ++q) {
    const Barycentric& l = load_rule.points[q];
    const Vec2 fv = f(g.point(l));
    const double w = load_rule.weights[q] * g.area();
    for (int j = 0; j < 3; ++j) {
      s.load(2 * j) -= w * l[j] * fv.x;
      s.load(2 * j + 1) -= w * l[j] * fv.y;
    }
  }
  return s;
}

/// Boundary integrals <phi_a e_d, g> of the Neumann-type data against the nodal hat
/// functions, 2-point Gauss per edge. Indexed like the full trace block (2 v + d).
inline Eigen::VectorXd neumann_moments(const Triangulation& mesh, const BoundaryData& data) {
  Eigen::VectorXd N = Eigen::VectorXd::Zero(2 * mesh.num_vertices());
  static const EdgeRule edge = gauss_legendre(2);
  for (const Edge& e : mesh.edges()) {
    if (!e.is_boundary() || !e.tag || *e.tag == BoundaryTag::hc) continue;
    const Vec2 a = mesh.x(e.v[0]), b = mesh.x(e.v[1]);
    for (std::size_t q = 0; q < edge.size(); ++q) {
      const double s = edge.points[q];
      const Vec2 x = a + s * (b - a);
      Vec2 g;
      switch (*e.tag) {
        case BoundaryTag::sc:
          if (!data.g_Nt) throw ConstraintError("missing soft clamped data g_Nt");
          g = data.g_Nt(x, e.n, e.t) * e.t;
          break;
        case BoundaryTag::ss:
          if (!data.g_Nn) throw ConstraintError("missing simply supported data g_Nn");
          g = data.g_Nn(x, e.n) * e.n;
          break;
        case BoundaryTag::sf:
          if (!data.g_N) throw ConstraintError("missing stress free data g_N");
          g = data.g_N(x, e.n);
          break;
        case BoundaryTag::hc: break;
      }
      const double w = edge.weights[q] * e.length;
      for (int k = 0; k < 2; ++k) {
        const double hat = k == 0 ? 1.0 - s : s;
        N(2 * e.v[k]) += w * hat * g.x;
        N(2 * e.v[k] + 1) += w * hat * g.y;
      }
    }
  }
  return N;
}

struct SaddleSystem {
  DofMap dofs;
  ConstraintSet constraints;
  SparseMatrix K_full;
  Eigen::VectorXd b_full;
  SparseMatrix P;           ///< full = P reduced + x0
  Eigen::VectorXd x0;
  SparseMatrix K;           ///< reduced, symmetric
  Eigen::VectorXd b;

  Eigen::Index reduced_size() const { return K.rows(); }
  Eigen::VectorXd expand(const Eigen::VectorXd& y) const { return P * y + x0; }

  /// Reduced coordinates of a full vector that satisfies the constraints.
  Eigen::VectorXd restrict(const Eigen::VectorXd& x) const {
    // P has orthonormal columns (unit vectors, disjoint supports)
    return P.transpose() * (x - x0);
  }
};

namespace detail {

inline void add_block(std::vector<Eigen::Triplet<double>>& trip, const int* rows, int nr, const int* cols, int nc,
                      const double* data, int ld) {
  for (int c = 0; c < nc; ++c)
    for (int r = 0; r < nr; ++r) {
      const double v = data[r + c * ld];
      if (v != 0.0) trip.emplace_back(rows[r], cols[c], v);
    }
}

}  // namespace detail

/// Assembles and reduces the system. Element matrices may be computed concurrently;
/// insertion happens serially in element order so the result does not depend on the
/// worker count.
inline SaddleSystem assemble(const Triangulation& mesh, const ManufacturedProblem& problem,
                             const AssemblyOptions& opt = {}) {
  SaddleSystem sys{DofMap(mesh), boundary_constraints(mesh, problem.boundary), {}, {}, {}, {}, {}, {}};
  const DofMap& dm = sys.dofs;
  const int nt = dm.num_triangles;

  std::vector<LocalSystem> local(nt);
  parallel_for(static_cast<std::size_t>(nt), thread_count(opt.threads), [&](std::size_t t) {
    local[t] = local_system(element_geometry(mesh, static_cast<int>(t)), problem.material, problem.f, *opt.load_rule);
  });

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nt) * (kStressDofs * kStressDofs + 4 * 6 * kStressDofs));
  sys.b_full = Eigen::VectorXd::Zero(dm.total());
  if (!opt.element_order.empty() && static_cast<int>(opt.element_order.size()) != nt)
    throw std::invalid_argument("assemble: element_order has the wrong length");
  for (int pos = 0; pos < nt; ++pos) {
    const int t = opt.element_order.empty() ? pos : opt.element_order[pos];
    const LocalSystem& ls = local[t];
    const auto sd = dm.stress_dofs(mesh, t);
    const Triangle& tri = mesh.triangle(t);
    std::array<int, 6> ud{}, td{};
    for (int j = 0; j < 3; ++j)
      for (int d = 0; d < 2; ++d) {
        ud[2 * j + d] = dm.displacement_dof(t, j, d);
        td[2 * j + d] = dm.trace_dof(tri.v[j], d);
      }
    detail::add_block(trip, sd.data(), kStressDofs, sd.data(), kStressDofs, ls.A.data(), kStressDofs);
    detail::add_block(trip, ud.data(), 6, sd.data(), kStressDofs, ls.B1.data(), 6);
    detail::add_block(trip, td.data(), 6, sd.data(), kStressDofs, ls.B2.data(), 6);
    const Eigen::Matrix<double, kStressDofs, 6> B1t = ls.B1.transpose(), B2t = ls.B2.transpose();
    detail::add_block(trip, sd.data(), kStressDofs, ud.data(), 6, B1t.data(), kStressDofs);
    detail::add_block(trip, sd.data(), kStressDofs, td.data(), 6, B2t.data(), kStressDofs);
    for (int k = 0; k < 6; ++k) sys.b_full(ud[k]) += ls.load(k);
  }
  sys.K_full.resize(dm.total(), dm.total());
  sys.K_full.setFromTriplets(trip.begin(), trip.end());
  trip.clear();
  trip.shrink_to_fit();
  sys.b_full.segment(dm.trace_offset(), dm.trace_size()) -= neumann_moments(mesh, problem.boundary);

  // elimination of the constrained trace components
  std::vector<Eigen::Triplet<double>> ptrip;
  sys.x0 = Eigen::VectorXd::Zero(dm.total());
  int col = 0;
  for (int i = 0; i < dm.trace_offset(); ++i) ptrip.emplace_back(i, col++, 1.0);
  for (int v = 0; v < dm.num_vertices; ++v) {
    const VertexConstraint& c = sys.constraints.vertices[v];
    const int ix = dm.trace_dof(v, 0), iy = dm.trace_dof(v, 1);
    sys.x0(ix) = c.value.x;
    sys.x0(iy) = c.value.y;
    if (c.rank == 0) {
      ptrip.emplace_back(ix, col++, 1.0);
      ptrip.emplace_back(iy, col++, 1.0);
    } else if (c.rank == 1) {
      if (c.free_direction.x != 0.0) ptrip.emplace_back(ix, col, c.free_direction.x);
      if (c.free_direction.y != 0.0) ptrip.emplace_back(iy, col, c.free_direction.y);
      ++col;
    }
  }
  sys.P.resize(dm.total(), col);
  sys.P.setFromTriplets(ptrip.begin(), ptrip.end());
  const SparseMatrix Pt = sys.P.transpose();
  sys.K = Pt * sys.K_full * sys.P;
  sys.K.prune(0.0);
  sys.b = Pt * (sys.b_full - sys.K_full * sys.x0);
  return sys;
}

/// max |K - K^T| / max |K|
inline double asymmetry(const SparseMatrix& K) {
  const SparseMatrix D = SparseMatrix(K.transpose()) - K;
  double dmax = 0.0, kmax = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  return kmax == 0.0 ? 0.0 : dmax / kmax;
}

struct DiscreteSolution {
  Eigen::VectorXd x;  ///< full vector in DofMap order
  SolveResult solve;
};

inline DiscreteSolution solve(const SaddleSystem& sys, const SolverOptions& opt = {}) {
  DiscreteSolution s;
  s.solve = solve_symmetric_indefinite(sys.K, sys.b, opt);
  s.x = sys.expand(s.solve.x);
  return s;
}

// ---------------------------------------------------------------------------
// Global interpolation and evaluation.

/// Stress DOF values of a field. Shared edge moments are taken from the first
/// adjacent triangle.
inline Eigen::VectorXd interpolate_stress(const Triangulation& mesh, const DofMap& dm, const TensorField& field,
                                          const DofRules& rules = {}) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dm.stress_size());
  for (int t = 0; t < dm.num_triangles; ++t) {
    const Vector15 d = local_dofs(element_geometry(mesh, t), field, rules);
    const auto sd = dm.stress_dofs(mesh, t);
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      if (mesh.edge(tri.e[i]).adjacent[0] == t) {
        x(sd[2 * i]) = d(2 * i);
        x(sd[2 * i + 1]) = d(2 * i + 1);
      }
    for (int k = 6; k < kStressDofs; ++k) x(sd[k]) = d(k);
  }
  return x;
}

/// Full vector holding the stress interpolant, the nodal values of u per element
/// and the nodal trace values.
inline Eigen::VectorXd interpolate_exact(const Triangulation& mesh, const DofMap& dm, const ManufacturedProblem& p) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dm.total());
  const auto sigma = p.sigma;
  const auto f = p.f;
  x.head(dm.stress_size()) = interpolate_stress(
      mesh, dm, TensorField{sigma, [f](const Vec2& y) { return -f(y); }});
  for (int t = 0; t < dm.num_triangles; ++t)
    for (int j = 0; j < 3; ++j) {
      const Vec2 u = p.u(mesh.x(mesh.triangle(t).v[j]));
      x(dm.displacement_dof(t, j, 0)) = u.x;
      x(dm.displacement_dof(t, j, 1)) = u.y;
    }
  for (int v = 0; v < dm.num_vertices; ++v) {
    const Vec2 u = p.u(mesh.x(v));
    x(dm.trace_dof(v, 0)) = u.x;
    x(dm.trace_dof(v, 1)) = u.y;
  }
  return x;
}

inline Vector15 gather_stress(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x, int t) {
  Vector15 d;
  const auto sd = dm.stress_dofs(mesh, t);
  for (int k = 0; k < kStressDofs; ++k) d(k) = x(sd[k]);
  return d;
}

inline LocalStress local_stress(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x, int t) {
  const StressElement el(element_geometry(mesh, t));
  return {el.geometry(), el.coefficients_from_dofs(gather_stress(mesh, dm, x, t))};
}

// ---------------------------------------------------------------------------
// Pure Dirichlet case.

struct CorrectionTensors {
  SymTensor2 sigma0;
  SymTensor2 sigma0h;
  bool active{false};  ///< false when stress free or simply supported pieces exist
};

/// sigma0 from the exact data by adaptive Gauss-Kronrod quadrature, sigma0h from the
/// nodal interpolant (exact for its linear traces).
inline CorrectionTensors correction_tensors(const Triangulation& mesh, const ManufacturedProblem& p) {
  CorrectionTensors c;
  if (mesh.has_tag(BoundaryTag::ss) || mesh.has_tag(BoundaryTag::sf)) return c;
  c.active = true;
  double exact = 0.0, discrete = 0.0;
  for (const Edge& e : mesh.edges()) {
    if (!e.is_boundary()) continue;
    const Vec2 a = mesh.x(e.v[0]), b = mesh.x(e.v[1]);
    std::function<double(const Vec2&)> normal_part;
    if (*e.tag == BoundaryTag::hc)
      normal_part = [&](const Vec2& x) { return dot(p.boundary.g_D(x), e.n); };
    else
      normal_part = [&](const Vec2& x) { return p.boundary.g_Dn(x, e.n); };
    exact += e.length * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                            [&](double s) { return normal_part(a + s * (b - a)); }, 0.0, 1.0, 15, 1e-13);
    discrete += e.length * 0.5 * (normal_part(a) + normal_part(b));
  }
  const double scale = (p.material.lambda + p.material.mu) / mesh.total_area();
  c.sigma0 = (scale * exact) * SymTensor2::identity();
  c.sigma0h = (scale * discrete) * SymTensor2::identity();
  return c;
}

/// sigma_h + I(sigma0 - sigma0h) when the correction applies, else sigma_h. Only
/// the stress block of the returned vector differs from the input.
inline Eigen::VectorXd corrected_stress(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x,
                                        const CorrectionTensors& c, bool pure_dirichlet, bool enabled) {
  if (!enabled || !pure_dirichlet || !c.active) return x;
  const SymTensor2 shift = c.sigma0 - c.sigma0h;
  Eigen::VectorXd y = x;
  y.head(dm.stress_size()) += interpolate_stress(
      mesh, dm, TensorField{[shift](const Vec2&) { return shift; }, [](const Vec2&) { return Vec2{}; }});
  return y;
}

struct TraceIdentity {
  double lhs{0.0};  ///< <tr sigma_h, 1>
  double rhs{0.0};  ///< 2 (lambda + mu) <eta . n, 1> over hc and sc
  /// 2 (lambda + mu) sum_e |<eta . n, 1>_e|; the flux may cancel to zero, so the
  /// defect is measured against the edge terms rather than their sum.
  double scale{0.0};
  double relative_defect() const {
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), scale, 1e-300});
  }
};

/// Both sides of <tr sigma_h, 1> = 2 (lambda + mu) <eta_h . n, 1>_{hc, sc}. The
/// left side is read off the mean-value DOFs.
inline TraceIdentity trace_identity(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x,
                                    const Material& m) {
  TraceIdentity r;
  for (int t = 0; t < dm.num_triangles; ++t)
    r.lhs += x(dm.interior_stress_dof(t, 0)) + x(dm.interior_stress_dof(t, 2));
  double flux = 0.0, magnitude = 0.0;
  for (const Edge& e : mesh.edges()) {
    if (!e.is_boundary() || (*e.tag != BoundaryTag::hc && *e.tag != BoundaryTag::sc)) continue;
    const Vec2 ea{x(dm.trace_dof(e.v[0], 0)), x(dm.trace_dof(e.v[0], 1))};
    const Vec2 eb{x(dm.trace_dof(e.v[1], 0)), x(dm.trace_dof(e.v[1], 1))};
    const double term = e.length * 0.5 * dot(ea + eb, e.n);
    flux += term;
    magnitude += std::abs(term);
  }
  r.rhs = 2.0 * (m.lambda + m.mu) * flux;
  r.scale = 2.0 * (m.lambda + m.mu) * magnitude;
  return r;
}

}  // namespace nnelast
