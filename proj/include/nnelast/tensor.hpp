/**
 * @file tensor.hpp
 * @brief Small fixed-size vector and symmetric-tensor types for planar elasticity.
 *
 * Symmetric 2x2 tensors are stored in Voigt order (a11, a12, a22). The Frobenius
 * product weights the off-diagonal slot by 2 so that triple products agree with
 * the tensor product A:B.
 */
#pragma once

#include <array>
#include <cmath>

namespace nnelast {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr double operator[](int i) const { return i == 0 ? x : y; }
  constexpr double& operator[](int i) { return i == 0 ? x : y; }

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(Vec2 a, double s) { return a *= 1.0 / s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Clockwise rotation by pi/2: (x, y) -> (y, -x).
constexpr Vec2 rotate_cw(const Vec2& a) { return {a.y, -a.x}; }

/// General 2x2 matrix, row-major.
struct Mat2 {
  double a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 from_columns(const Vec2& c1, const Vec2& c2) {
    return {c1.x, c2.x, c1.y, c2.y};
  }

  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
  constexpr Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }
  constexpr double operator()(int r, int c) const {
    return r == 0 ? (c == 0 ? a11 : a12) : (c == 0 ? a21 : a22);
  }
};

constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}
constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
  return {m.a11 * n.a11 + m.a12 * n.a21, m.a11 * n.a12 + m.a12 * n.a22,
          m.a21 * n.a11 + m.a22 * n.a21, m.a21 * n.a12 + m.a22 * n.a22};
}
constexpr Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
}
constexpr Mat2 operator+(const Mat2& m, const Mat2& n) {
  return {m.a11 + n.a11, m.a12 + n.a12, m.a21 + n.a21, m.a22 + n.a22};
}

/// Symmetric 2x2 tensor in Voigt storage (a11, a12, a22).
struct SymTensor2 {
  double a11{0.0};
  double a12{0.0};
  double a22{0.0};

  static constexpr SymTensor2 identity() { return {1.0, 0.0, 1.0}; }

  /// Voigt component k in {0, 1, 2}.
  constexpr double operator[](int k) const { return k == 0 ? a11 : (k == 1 ? a12 : a22); }
  constexpr double& operator[](int k) { return k == 0 ? a11 : (k == 1 ? a12 : a22); }

  constexpr double trace() const { return a11 + a22; }
  constexpr SymTensor2 dev() const {
    const double h = 0.5 * trace();
    return {a11 - h, a12, a22 - h};
  }
  constexpr Mat2 to_matrix() const { return {a11, a12, a12, a22}; }

  constexpr SymTensor2& operator+=(const SymTensor2& o) {
    a11 += o.a11; a12 += o.a12; a22 += o.a22;
    return *this;
  }
  constexpr SymTensor2& operator-=(const SymTensor2& o) {
    a11 -= o.a11; a12 -= o.a12; a22 -= o.a22;
    return *this;
  }
  constexpr SymTensor2& operator*=(double s) {
    a11 *= s; a12 *= s; a22 *= s;
    return *this;
  }
};

constexpr SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
constexpr SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
constexpr SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
constexpr SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }

/// Frobenius product A:B.
constexpr double frobenius(const SymTensor2& a, const SymTensor2& b) {
  return a.a11 * b.a11 + 2.0 * a.a12 * b.a12 + a.a22 * b.a22;
}
inline double frobenius_norm(const SymTensor2& a) { return std::sqrt(frobenius(a, a)); }

/// Tensor times vector.
constexpr Vec2 operator*(const SymTensor2& s, const Vec2& v) {
  return {s.a11 * v.x + s.a12 * v.y, s.a12 * v.x + s.a22 * v.y};
}

/// Symmetrized dyadic product (a b^T + b a^T) / 2.
constexpr SymTensor2 sym_outer(const Vec2& a, const Vec2& b) {
  return {a.x * b.x, 0.5 * (a.x * b.y + a.y * b.x), a.y * b.y};
}

/// Symmetric part of a general matrix.
constexpr SymTensor2 sym(const Mat2& m) { return {m.a11, 0.5 * (m.a12 + m.a21), m.a22}; }

/// Congruence M S M^T, symmetric for symmetric S.
constexpr SymTensor2 congruence(const Mat2& m, const SymTensor2& s) {
  return sym(m * s.to_matrix() * m.transpose());
}

}  // namespace nnelast
