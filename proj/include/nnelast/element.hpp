/**
 * @file element.hpp
 * @brief Piecewise quadratic symmetric stress element with linear normal-normal traces.
 *
 * The local space consists of symmetric quadratic tensors whose normal-normal
 * trace is linear on every edge (dimension 15). It is spanned by
 *
 *   N_{i,1} = T_i,             N_{i,2} = (l_{i+2} - l_{i+1}) T_i,
 *   B_{i,1} = l_i T_i,         B_{i,2} = l_i l_{i+1} T_i,      B_{i,3} = l_i l_{i+2} T_i,
 *
 * with barycentric coordinates l_i and the corner tensors
 * T_i = sym(t_{i+1} (x) t_{i+2}) / ((n_i . t_{i+1}) (n_i . t_{i+2})), which satisfy
 * n_j . T_i n_j = delta_ij on edge j. Indices are taken modulo 3.
 *
 * Degrees of freedom, in this order:
 *   0..5   |e| <n.tau n, q>_e for each local edge, q in {1, sqrt(3)(2s-1)} with s the
 *          global edge parameter (lower to higher vertex id);
 *   6..8   (tau, c)_T for c in {e1 e1^T, sym(e1 e2^T), e2 e2^T};
 *   9..14  (div tau, l_j e_d)_T, index 9 + 2 j + d.
 * The test bases are conventions; only their spans matter for the interpolant.
 */
#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "nnelast/fields.hpp"
#include "nnelast/mesh.hpp"
#include "nnelast/quadrature.hpp"
#include "nnelast/tensor.hpp"

namespace nnelast {

inline constexpr int kStressDofs = 15;
inline constexpr int kDisplacementDofs = 6;

using Matrix15 = Eigen::Matrix<double, kStressDofs, kStressDofs>;
using Vector15 = Eigen::Matrix<double, kStressDofs, 1>;
using BasisValues = std::array<SymTensor2, kStressDofs>;
using BasisDivergences = std::array<Vec2, kStressDofs>;
using Barycentric = std::array<double, 3>;

class ElementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace debug {
/// Negative-control hook: perturbs N_{1,2} by l_2 l_3 T_1, which makes its
/// normal-normal trace on edge 1 quadratic. Never set outside verification runs.
inline std::atomic<bool> tamper_basis{false};
}  // namespace debug

/// Geometric data of one triangle in local numbering.
class ElementGeometry {
 public:
  explicit ElementGeometry(const std::array<Vec2, 3>& x, const std::array<bool, 3>& flipped = {})
      : x_(x), flipped_(flipped) {
    area_ = 0.5 * cross(x[1] - x[0], x[2] - x[0]);
    double hmax = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2 d = x[(i + 2) % 3] - x[(i + 1) % 3];
      length_[i] = norm(d);
      hmax = std::max(hmax, length_[i]);
    }
    if (!(area_ > 1e-14 * hmax * hmax))
      throw ElementError("degenerate or clockwise triangle (signed area " + std::to_string(area_) + ")");
    for (int i = 0; i < 3; ++i) {
      const Vec2 d = x[(i + 2) % 3] - x[(i + 1) % 3];
      t_[i] = d / length_[i];
      n_[i] = rotate_cw(t_[i]);
      grad_[i] = Vec2{x[(i + 1) % 3].y - x[(i + 2) % 3].y, x[(i + 2) % 3].x - x[(i + 1) % 3].x} /
                 (2.0 * area_);
    }
    centroid_ = (x[0] + x[1] + x[2]) / 3.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = t_[(i + 1) % 3];
      const Vec2& b = t_[(i + 2) % 3];
      corner_[i] = sym_outer(a, b) * (1.0 / (dot(n_[i], a) * dot(n_[i], b)));
    }
  }

  const std::array<Vec2, 3>& vertices() const { return x_; }
  const Vec2& vertex(int i) const { return x_[i]; }
  double area() const { return area_; }
  double edge_length(int i) const { return length_[i]; }
  /// Unit tangent of local edge i, from x_{i+1} to x_{i+2}.
  const Vec2& tangent(int i) const { return t_[i]; }
  /// Exterior unit normal of local edge i.
  const Vec2& normal(int i) const { return n_[i]; }
  const Vec2& grad_lambda(int i) const { return grad_[i]; }
  const SymTensor2& corner_tensor(int i) const { return corner_[i]; }
  bool flipped(int i) const { return flipped_[i]; }

  Barycentric barycentric(const Vec2& p) const {
    Barycentric l{};
    for (int i = 0; i < 3; ++i) l[i] = 1.0 / 3.0 + dot(grad_[i], p - centroid_);
    return l;
  }
  Vec2 point(const Barycentric& l) const { return l[0] * x_[0] + l[1] * x_[1] + l[2] * x_[2]; }

  /// Point of local edge i at global edge parameter s.
  Vec2 edge_point(int i, double s) const {
    Vec2 a = x_[(i + 1) % 3], b = x_[(i + 2) % 3];
    if (flipped_[i]) std::swap(a, b);
    return a + s * (b - a);
  }

 private:
  std::array<Vec2, 3> x_;
  std::array<bool, 3> flipped_;
  double area_{0.0};
  std::array<double, 3> length_{};
  std::array<Vec2, 3> t_, n_, grad_;
  std::array<SymTensor2, 3> corner_;
  Vec2 centroid_;
};

inline ElementGeometry element_geometry(const Triangulation& mesh, int t) {
  return ElementGeometry(mesh.coords(t), {mesh.edge_flipped(t, 0), mesh.edge_flipped(t, 1), mesh.edge_flipped(t, 2)});
}

/// The corner tensors T_1, T_2, T_3.
inline std::array<SymTensor2, 3> corner_tensors(const ElementGeometry& g) {
  return {g.corner_tensor(0), g.corner_tensor(1), g.corner_tensor(2)};
}

/// Legendre pair orthonormal on [0, 1].
inline double edge_test_function(int k, double s) { return k == 0 ? 1.0 : std::sqrt(3.0) * (2.0 * s - 1.0); }

namespace detail {

struct ScalarFactor {
  double value;
  Vec2 grad;
};

inline ScalarFactor basis_factor(const ElementGeometry& g, const Barycentric& l, int k) {
  const auto G = [&](int i) -> const Vec2& { return g.grad_lambda(i % 3); };
  const auto L = [&](int i) { return l[i % 3]; };
  if (k < 6) {
    const int i = k / 2;
    if (k % 2 == 0) return {1.0, {}};
    ScalarFactor f{L(i + 2) - L(i + 1), G(i + 2) - G(i + 1)};
    if (i == 0 && debug::tamper_basis.load(std::memory_order_relaxed)) {
      f.value += L(1) * L(2);
      f.grad += L(1) * G(2) + L(2) * G(1);
    }
    return f;
  }
  const int i = (k - 6) / 3;
  switch ((k - 6) % 3) {
    case 0: return {L(i), G(i)};
    case 1: return {L(i) * L(i + 1), L(i) * G(i + 1) + L(i + 1) * G(i)};
    default: return {L(i) * L(i + 2), L(i) * G(i + 2) + L(i + 2) * G(i)};
  }
}

/// Index of the corner tensor carried by basis member k.
constexpr int basis_corner(int k) { return k < 6 ? k / 2 : (k - 6) / 3; }

}  // namespace detail

/// All 15 basis tensors at p.
inline BasisValues eval_basis(const ElementGeometry& g, const Vec2& p) {
  const Barycentric l = g.barycentric(p);
  BasisValues v;
  for (int k = 0; k < kStressDofs; ++k)
    v[k] = detail::basis_factor(g, l, k).value * g.corner_tensor(detail::basis_corner(k));
  return v;
}

/// Divergences of the basis tensors at p; div(f T) = T grad f.
inline BasisDivergences eval_basis_div(const ElementGeometry& g, const Vec2& p) {
  const Barycentric l = g.barycentric(p);
  BasisDivergences d;
  for (int k = 0; k < kStressDofs; ++k)
    d[k] = g.corner_tensor(detail::basis_corner(k)) * detail::basis_factor(g, l, k).grad;
  return d;
}

/// Basis member k as a field (tests and diagnostics).
inline TensorField basis_field(const ElementGeometry& g, int k) {
  return {[g, k](const Vec2& p) { return eval_basis(g, p)[k]; },
          [g, k](const Vec2& p) { return eval_basis_div(g, p)[k]; }};
}

struct DofRules {
  EdgeRule edge = gauss_legendre(3);
  const TriangleRule* element = &triangle_rule_7pt();
};

/// The 15 functionals applied to a field. Divergence moments use the analytic
/// divergence when present, otherwise <tau n, v>_{dT} - (tau, eps(v))_T.
inline Vector15 local_dofs(const ElementGeometry& g, const TensorField& field, const DofRules& rules = {}) {
  Vector15 d = Vector15::Zero();
  for (int i = 0; i < 3; ++i) {
    const double len = g.edge_length(i);
    const Vec2& n = g.normal(i);
    for (std::size_t q = 0; q < rules.edge.size(); ++q) {
      const double s = rules.edge.points[q];
      const double w = rules.edge.weights[q] * len * len;
      const double nn = dot(n, field.value(g.edge_point(i, s)) * n);
      d(2 * i) += w * nn * edge_test_function(0, s);
      d(2 * i + 1) += w * nn * edge_test_function(1, s);
    }
  }
  const TriangleRule& er = *rules.element;
  for (std::size_t q = 0; q < er.size(); ++q) {
    const Barycentric& l = er.points[q];
    const Vec2 p = g.point(l);
    const double w = er.weights[q] * g.area();
    const SymTensor2 tau = field.value(p);
    d(6) += w * tau.a11;
    d(7) += w * tau.a12;
    d(8) += w * tau.a22;
    if (field.has_divergence()) {
      const Vec2 div = field.divergence(p);
      for (int j = 0; j < 3; ++j) {
        d(9 + 2 * j) += w * l[j] * div.x;
        d(10 + 2 * j) += w * l[j] * div.y;
      }
    } else {
      for (int j = 0; j < 3; ++j) {
        const Vec2& gl = g.grad_lambda(j);
        // tau : sym(e_d (x) grad l_j) = (tau grad l_j)_d
        const Vec2 tg = tau * gl;
        d(9 + 2 * j) -= w * tg.x;
        d(10 + 2 * j) -= w * tg.y;
      }
    }
  }
  if (!field.has_divergence()) {
    for (int i = 0; i < 3; ++i) {
      const Vec2& n = g.normal(i);
      const Vec2 a = g.vertex((i + 1) % 3), b = g.vertex((i + 2) % 3);
      for (std::size_t q = 0; q < rules.edge.size(); ++q) {
        const double s = rules.edge.points[q];
        const double w = rules.edge.weights[q] * g.edge_length(i);
        const Vec2 p = a + s * (b - a);
        const Vec2 tn = field.value(p) * n;
        const Barycentric l = g.barycentric(p);
        for (int j = 0; j < 3; ++j) {
          d(9 + 2 * j) += w * l[j] * tn.x;
          d(10 + 2 * j) += w * l[j] * tn.y;
        }
      }
    }
  }
  return d;
}

/// Entry (k, m) is functional k applied to basis member m. Quadrature is exact
/// for the local space (2-point Gauss on edges, degree 5 inside).
inline Matrix15 dof_matrix(const ElementGeometry& g) {
  Matrix15 D = Matrix15::Zero();
  static const EdgeRule edge = gauss_legendre(2);
  for (int i = 0; i < 3; ++i) {
    const double len = g.edge_length(i);
    const Vec2& n = g.normal(i);
    for (std::size_t q = 0; q < edge.size(); ++q) {
      const double s = edge.points[q];
      const double w = edge.weights[q] * len * len;
      const BasisValues v = eval_basis(g, g.edge_point(i, s));
      for (int m = 0; m < kStressDofs; ++m) {
        const double nn = dot(n, v[m] * n);
        D(2 * i, m) += w * nn * edge_test_function(0, s);
        D(2 * i + 1, m) += w * nn * edge_test_function(1, s);
      }
    }
  }
  const TriangleRule& er = triangle_rule_7pt();
  for (std::size_t q = 0; q < er.size(); ++q) {
    const Barycentric& l = er.points[q];
    const Vec2 p = g.point(l);
    const double w = er.weights[q] * g.area();
    const BasisValues v = eval_basis(g, p);
    const BasisDivergences dv = eval_basis_div(g, p);
    for (int m = 0; m < kStressDofs; ++m) {
      D(6, m) += w * v[m].a11;
      D(7, m) += w * v[m].a12;
      D(8, m) += w * v[m].a22;
      for (int j = 0; j < 3; ++j) {
        D(9 + 2 * j, m) += w * l[j] * dv[m].x;
        D(10 + 2 * j, m) += w * l[j] * dv[m].y;
      }
    }
  }
  return D;
}

/// Local element with its nodal (dual) basis: shape function k has coefficient
/// column k of the inverse DOF matrix and satisfies dof_j(phi_k) = delta_jk.
class StressElement {
 public:
  explicit StressElement(ElementGeometry g) : g_(std::move(g)), D_(nnelast::dof_matrix(g_)) {
    Eigen::PartialPivLU<Matrix15> lu(D_);
    if (!(lu.rcond() > 1e-14)) throw ElementError("singular local DOF matrix (rcond " + std::to_string(lu.rcond()) + ")");
    dual_ = lu.inverse();
  }

  const ElementGeometry& geometry() const { return g_; }
  const Matrix15& dof_matrix() const { return D_; }
  const Matrix15& dual() const { return dual_; }

  /// Coefficients in the monomial-style basis reproducing the given DOF values.
  Vector15 coefficients_from_dofs(const Vector15& dofs) const { return dual_ * dofs; }

  /// Nodal shape functions at p.
  BasisValues shape_values(const Vec2& p) const {
    const BasisValues b = eval_basis(g_, p);
    BasisValues s{};
    for (int k = 0; k < kStressDofs; ++k)
      for (int m = 0; m < kStressDofs; ++m) s[k] += dual_(m, k) * b[m];
    return s;
  }
  BasisDivergences shape_divergences(const Vec2& p) const {
    const BasisDivergences b = eval_basis_div(g_, p);
    BasisDivergences s{};
    for (int k = 0; k < kStressDofs; ++k)
      for (int m = 0; m < kStressDofs; ++m) s[k] += dual_(m, k) * b[m];
    return s;
  }

 private:
  ElementGeometry g_;
  Matrix15 D_;
  Matrix15 dual_;
};

/// A member of the local space given by its basis coefficients.
struct LocalStress {
  ElementGeometry geometry;
  Vector15 coefficients;

  SymTensor2 operator()(const Vec2& p) const {
    const BasisValues b = eval_basis(geometry, p);
    SymTensor2 s;
    for (int k = 0; k < kStressDofs; ++k) s += coefficients(k) * b[k];
    return s;
  }
  Vec2 divergence(const Vec2& p) const {
    const BasisDivergences b = eval_basis_div(geometry, p);
    Vec2 d;
    for (int k = 0; k < kStressDofs; ++k) d += coefficients(k) * b[k];
    return d;
  }
  TensorField field() const {
    const LocalStress self = *this;
    return {[self](const Vec2& p) { return self(p); }, [self](const Vec2& p) { return self.divergence(p); }};
  }
};

/// Local interpolant: coefficients c with dof_matrix c = local_dofs(field).
inline LocalStress interpolate_local(const ElementGeometry& g, const TensorField& field, const DofRules& rules = {}) {
  const StressElement el(g);
  return {g, el.coefficients_from_dofs(local_dofs(g, field, rules))};
}

// ---------------------------------------------------------------------------
// Transformations between the reference triangle and a physical triangle.

enum class TensorPiola {
  contravariant,  ///< J^2 tau o F = B tauhat B^T
  covariant,      ///< tau o F = J B^{-T} tauhat B^{-1}
};

namespace detail {

inline Mat2 piola_factor(const AffineMap& map, TensorPiola kind) {
  return kind == TensorPiola::contravariant ? map.B : map.B.inverse().transpose();
}
inline double piola_scale(const AffineMap& map, TensorPiola kind) {
  return kind == TensorPiola::contravariant ? 1.0 / (map.J * map.J) : map.J;
}

}  // namespace detail

/// Pointwise transform of a reference tensor field. For the contravariant form the
/// divergence follows J^2 div(tau) o F = B divhat(tauhat).
inline TensorField transform_tensor(const AffineMap& map, TensorPiola kind, const TensorField& ref) {
  const Mat2 M = detail::piola_factor(map, kind);
  const double s = detail::piola_scale(map, kind);
  TensorField out;
  out.value = [map, M, s, v = ref.value](const Vec2& x) { return s * congruence(M, v(map.inverse(x))); };
  if (ref.has_divergence() && kind == TensorPiola::contravariant)
    out.divergence = [map, d = ref.divergence](const Vec2& x) {
      return (1.0 / (map.J * map.J)) * (map.B * d(map.inverse(x)));
    };
  return out;
}

/// Exact transform of a polynomial tensor field: the result is again polynomial.
inline PolyTensor transform_tensor(const AffineMap& map, TensorPiola kind, const PolyTensor& ref) {
  const Mat2 M = detail::piola_factor(map, kind);
  const double s = detail::piola_scale(map, kind);
  const Mat2 Binv = map.B.inverse();
  const Vec2 shift = -(Binv * map.a);
  const Poly2 p11 = ref.c11.compose_affine(Binv, shift);
  const Poly2 p12 = ref.c12.compose_affine(Binv, shift);
  const Poly2 p22 = ref.c22.compose_affine(Binv, shift);
  // (M S M^T) written componentwise in (s11, s12, s22).
  const auto comb = [&](double a, double b, double c) { return s * (a * p11 + b * p12 + c * p22); };
  return {comb(M.a11 * M.a11, 2.0 * M.a11 * M.a12, M.a12 * M.a12),
          comb(M.a11 * M.a21, M.a11 * M.a22 + M.a12 * M.a21, M.a12 * M.a22),
          comb(M.a21 * M.a21, 2.0 * M.a21 * M.a22, M.a22 * M.a22)};
}

/// Rescaled covariant Piola transform v o F = J B^{-T} vhat.
inline VectorField transform_vector(const AffineMap& map, const VectorField& ref) {
  const Mat2 M = map.J * map.B.inverse().transpose();
  return {[map, M, v = ref.value](const Vec2& x) { return M * v(map.inverse(x)); }};
}

inline PolyVector transform_vector(const AffineMap& map, const PolyVector& ref) {
  const Mat2 M = map.J * map.B.inverse().transpose();
  const Mat2 Binv = map.B.inverse();
  const Vec2 shift = -(Binv * map.a);
  const Poly2 p1 = ref.c1.compose_affine(Binv, shift);
  const Poly2 p2 = ref.c2.compose_affine(Binv, shift);
  return {M.a11 * p1 + M.a12 * p2, M.a21 * p1 + M.a22 * p2};
}

/// Discrepancies of the three DOF invariance identities under the paired transforms
/// (contravariant tensors, covariant constant test tensors, rescaled Piola test vectors,
/// edge test functions composed with the map).
struct DofTransformReport {
  double edge_moments{0.0};
  double mean_moments{0.0};
  double div_moments{0.0};
  double scale{0.0};  ///< magnitude of the compared quantities
  bool edge_ok{false};
  bool mean_ok{false};
  bool div_ok{false};

  bool all_ok() const { return edge_ok && mean_ok && div_ok; }
};

inline DofTransformReport dof_transform_check(const AffineMap& map, const PolyTensor& ref, double tol = 1e-12) {
  const ElementGeometry ghat(reference_vertices());
  const ElementGeometry g({map(reference_vertices()[0]), map(reference_vertices()[1]), map(reference_vertices()[2])});
  const PolyTensor phys = transform_tensor(map, TensorPiola::contravariant, ref);
  const EdgeRule er = gauss_legendre(4);
  const TriangleRule tr = triangle_rule_collapsed(6);

  DofTransformReport rep;
  double scale = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 2; ++k) {
      double a = 0.0, b = 0.0;
      for (std::size_t q = 0; q < er.size(); ++q) {
        const double s = er.points[q];
        a += er.weights[q] * dot(g.normal(i), phys(g.edge_point(i, s)) * g.normal(i)) * edge_test_function(k, s);
        b += er.weights[q] * dot(ghat.normal(i), ref(ghat.edge_point(i, s)) * ghat.normal(i)) * edge_test_function(k, s);
      }
      a *= g.edge_length(i) * g.edge_length(i);
      b *= ghat.edge_length(i) * ghat.edge_length(i);
      rep.edge_moments = std::max(rep.edge_moments, std::abs(a - b));
      scale = std::max(scale, std::abs(b));
    }
  const Mat2 Mc = map.J * map.B.inverse().transpose();
  for (int c = 0; c < 3; ++c) {
    SymTensor2 chat;
    chat[c] = c == 1 ? 0.5 : 1.0;
    const SymTensor2 cphys = sym(Mc * chat.to_matrix() * map.B.inverse());
    double a = 0.0, b = 0.0;
    for (std::size_t q = 0; q < tr.size(); ++q) {
      a += tr.weights[q] * g.area() * frobenius(phys(g.point(tr.points[q])), cphys);
      b += tr.weights[q] * ghat.area() * frobenius(ref(ghat.point(tr.points[q])), chat);
    }
    rep.mean_moments = std::max(rep.mean_moments, std::abs(a - b));
    scale = std::max(scale, std::abs(b));
  }
  for (int j = 0; j < 3; ++j)
    for (int d = 0; d < 2; ++d) {
      // vhat = lhat_j e_d as an exact polynomial on the reference triangle
      PolyVector vhat{Poly2(1), Poly2(1)};
      Poly2 lam(1);
      const Vec2 gl = ghat.grad_lambda(j);
      lam.coef(0, 0) = ghat.barycentric({0.0, 0.0})[j];
      lam.coef(1, 0) = gl.x;
      lam.coef(0, 1) = gl.y;
      (d == 0 ? vhat.c1 : vhat.c2) = lam;
      const PolyVector v = transform_vector(map, vhat);
      double a = 0.0, b = 0.0;
      for (std::size_t q = 0; q < tr.size(); ++q) {
        const Vec2 p = g.point(tr.points[q]);
        const Vec2 ph = ghat.point(tr.points[q]);
        a += tr.weights[q] * g.area() * dot(phys.divergence(p), v(p));
        b += tr.weights[q] * ghat.area() * dot(ref.divergence(ph), vhat(ph));
      }
      rep.div_moments = std::max(rep.div_moments, std::abs(a - b));
      scale = std::max(scale, std::abs(b));
    }
  rep.scale = scale;
  const double bound = tol * std::max(scale, 1.0);
  rep.edge_ok = rep.edge_moments <= bound;
  rep.mean_ok = rep.mean_moments <= bound;
  rep.div_ok = rep.div_moments <= bound;
  return rep;
}

}  // namespace nnelast
