/**
 * @file fields.hpp
 * @brief Callable tensor/vector fields and exact bivariate polynomial fields.
 *
 * Polynomial fields carry exact derivatives and can be composed with affine
 * maps, which makes them the workhorse of the element property checks.
 */
#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "nnelast/tensor.hpp"

namespace nnelast {

/// Tensor field given by pointwise values; the divergence is optional.
struct TensorField {
  std::function<SymTensor2(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> divergence;

  bool has_divergence() const { return static_cast<bool>(divergence); }
};

struct VectorField {
  std::function<Vec2(const Vec2&)> value;
};

/// Bivariate polynomial sum c_ij x^i y^j with i + j <= degree.
class Poly2 {
 public:
  Poly2() : Poly2(0) {}
  explicit Poly2(int degree) : deg_(degree), c_((degree + 1) * (degree + 1), 0.0) {}

  static Poly2 constant(double v) {
    Poly2 p(0);
    p.coef(0, 0) = v;
    return p;
  }

  /// Polynomial of the given degree with coefficients uniform in [-1, 1].
  template <class Rng>
  static Poly2 random(int degree, Rng& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Poly2 p(degree);
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) p.coef(i, j) = dist(rng);
    return p;
  }

  int degree() const { return deg_; }
  double& coef(int i, int j) { return c_[i * (deg_ + 1) + j]; }
  double coef(int i, int j) const {
    if (i < 0 || j < 0 || i + j > deg_) return 0.0;
    return c_[i * (deg_ + 1) + j];
  }

  double operator()(const Vec2& p) const {
    // Horner in y for each power of x, then in x.
    double acc = 0.0;
    for (int i = deg_; i >= 0; --i) {
      double row = 0.0;
      for (int j = deg_ - i; j >= 0; --j) row = row * p.y + coef(i, j);
      acc = acc * p.x + row;
    }
    return acc;
  }

  Poly2 dx() const {
    Poly2 d(std::max(deg_ - 1, 0));
    for (int i = 1; i <= deg_; ++i)
      for (int j = 0; i + j <= deg_; ++j) d.coef(i - 1, j) = i * coef(i, j);
    return d;
  }
  Poly2 dy() const {
    Poly2 d(std::max(deg_ - 1, 0));
    for (int i = 0; i <= deg_; ++i)
      for (int j = 1; i + j <= deg_; ++j) d.coef(i, j - 1) = j * coef(i, j);
    return d;
  }

  Poly2& operator+=(const Poly2& o) {
    if (o.deg_ > deg_) *this = raised(o.deg_);
    for (int i = 0; i <= o.deg_; ++i)
      for (int j = 0; i + j <= o.deg_; ++j) coef(i, j) += o.coef(i, j);
    return *this;
  }
  Poly2& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }

  friend Poly2 operator*(const Poly2& a, const Poly2& b) {
    Poly2 r(a.deg_ + b.deg_);
    for (int i = 0; i <= a.deg_; ++i)
      for (int j = 0; i + j <= a.deg_; ++j)
        for (int k = 0; k <= b.deg_; ++k)
          for (int l = 0; k + l <= b.deg_; ++l) r.coef(i + k, j + l) += a.coef(i, j) * b.coef(k, l);
    return r;
  }

  /// Substitution p(M x + b), exact.
  Poly2 compose_affine(const Mat2& m, const Vec2& b) const {
    Poly2 lx(1), ly(1);
    lx.coef(0, 0) = b.x; lx.coef(1, 0) = m.a11; lx.coef(0, 1) = m.a12;
    ly.coef(0, 0) = b.y; ly.coef(1, 0) = m.a21; ly.coef(0, 1) = m.a22;
    std::vector<Poly2> xp{Poly2::constant(1.0)}, yp{Poly2::constant(1.0)};
    for (int k = 1; k <= deg_; ++k) {
      xp.push_back(xp.back() * lx);
      yp.push_back(yp.back() * ly);
    }
    Poly2 r(deg_);
    for (int i = 0; i <= deg_; ++i)
      for (int j = 0; i + j <= deg_; ++j) {
        if (coef(i, j) == 0.0) continue;
        Poly2 term = xp[i] * yp[j];
        term *= coef(i, j);
        r += term;
      }
    return r;
  }

 private:
  Poly2 raised(int degree) const {
    Poly2 r(degree);
    for (int i = 0; i <= deg_; ++i)
      for (int j = 0; i + j <= deg_; ++j) r.coef(i, j) = coef(i, j);
    return r;
  }

  int deg_;
  std::vector<double> c_;
};

inline Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
inline Poly2 operator*(double s, Poly2 a) { return a *= s; }

/// Symmetric tensor field with polynomial Voigt components.
struct PolyTensor {
  Poly2 c11, c12, c22;

  template <class Rng>
  static PolyTensor random(int degree, Rng& rng) {
    return {Poly2::random(degree, rng), Poly2::random(degree, rng), Poly2::random(degree, rng)};
  }

  SymTensor2 operator()(const Vec2& p) const { return {c11(p), c12(p), c22(p)}; }
  /// Row-wise divergence.
  Vec2 divergence(const Vec2& p) const {
    return {c11.dx()(p) + c12.dy()(p), c12.dx()(p) + c22.dy()(p)};
  }

  TensorField field() const {
    const PolyTensor self = *this;
    const Poly2 d1 = c11.dx() + c12.dy();
    const Poly2 d2 = c12.dx() + c22.dy();
    return {[self](const Vec2& p) { return self(p); },
            [d1, d2](const Vec2& p) { return Vec2{d1(p), d2(p)}; }};
  }

  /// Field without a divergence, to exercise integration-by-parts paths.
  TensorField values_only() const {
    const PolyTensor self = *this;
    return {[self](const Vec2& p) { return self(p); }, {}};
  }
};

struct PolyVector {
  Poly2 c1, c2;

  template <class Rng>
  static PolyVector random(int degree, Rng& rng) {
    return {Poly2::random(degree, rng), Poly2::random(degree, rng)};
  }

  Vec2 operator()(const Vec2& p) const { return {c1(p), c2(p)}; }
  SymTensor2 strain(const Vec2& p) const {
    return {c1.dx()(p), 0.5 * (c1.dy()(p) + c2.dx()(p)), c2.dy()(p)};
  }
  VectorField field() const {
    const PolyVector self = *this;
    return {[self](const Vec2& p) { return self(p); }};
  }
};

}  // namespace nnelast
