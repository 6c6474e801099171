/**
 * @file problem.hpp
 * @brief Manufactured problems with closed-form solutions and their boundary data.
 */
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "nnelast/material.hpp"
#include "nnelast/mesh.hpp"
#include "nnelast/tensor.hpp"

namespace nnelast {

/// Data on the four boundary piece types. Each function receives the point and
/// the unit normal/tangent of the side it is evaluated on.
struct BoundaryData {
  std::function<Vec2(const Vec2& x)> g_D;                                      ///< hc: u
  std::function<double(const Vec2& x, const Vec2& n)> g_Dn;                   ///< sc: u.n
  std::function<double(const Vec2& x, const Vec2& t)> g_Dt;                   ///< ss: u.t
  std::function<double(const Vec2& x, const Vec2& n, const Vec2& t)> g_Nt;    ///< sc: t.sigma n
  std::function<double(const Vec2& x, const Vec2& n)> g_Nn;                  ///< ss: n.sigma n
  std::function<Vec2(const Vec2& x, const Vec2& n)> g_N;                      ///< sf: sigma n
};

/// Boundary data taken from the traces of an exact solution.
inline BoundaryData boundary_data_from_exact(std::function<Vec2(const Vec2&)> u,
                                             std::function<SymTensor2(const Vec2&)> sigma) {
  BoundaryData d;
  d.g_D = u;
  d.g_Dn = [u](const Vec2& x, const Vec2& n) { return dot(u(x), n); };
  d.g_Dt = [u](const Vec2& x, const Vec2& t) { return dot(u(x), t); };
  d.g_Nt = [sigma](const Vec2& x, const Vec2& n, const Vec2& t) { return dot(t, sigma(x) * n); };
  d.g_Nn = [sigma](const Vec2& x, const Vec2& n) { return dot(n, sigma(x) * n); };
  d.g_N = [sigma](const Vec2& x, const Vec2& n) { return sigma(x) * n; };
  return d;
}

struct ManufacturedProblem {
  std::string name;
  Material material;
  std::function<Vec2(const Vec2&)> u;
  std::function<Mat2(const Vec2&)> grad_u;  ///< (i, j) entry d u_i / d x_j
  std::function<SymTensor2(const Vec2&)> sigma;
  std::function<Vec2(const Vec2&)> f;       ///< f = -div sigma
  BoundaryData boundary;
  /// Coarse mesh with n cells per unit length, boundary tags applied.
  std::function<Triangulation(int n)> coarse_mesh;
  bool pure_dirichlet{false};
  std::optional<double> alpha;  ///< singular exponent where applicable

  SymTensor2 strain(const Vec2& x) const { return sym(grad_u(x)); }
  Vec2 div_sigma(const Vec2& x) const { return -f(x); }
};

inline bool is_pure_dirichlet(const SideTags& t) {
  const auto dirichlet = [](BoundaryTag b) { return b == BoundaryTag::hc || b == BoundaryTag::sc; };
  return dirichlet(t.bottom) && dirichlet(t.right) && dirichlet(t.top) && dirichlet(t.left);
}

/// The usual mixed assignment on the unit square: bottom hc, right sc, top ss, left sf.
inline SideTags mixed_square_tags() {
  return {BoundaryTag::hc, BoundaryTag::sc, BoundaryTag::ss, BoundaryTag::sf};
}

/// u = (sin 3x cos 3y, cos 3x sin 3y) on the unit square.
inline ManufacturedProblem smooth_square_problem(const Material& m, const SideTags& tags = mixed_square_tags()) {
  ManufacturedProblem p;
  p.name = "smooth";
  p.material = m;
  p.u = [](const Vec2& x) {
    return Vec2{std::sin(3 * x.x) * std::cos(3 * x.y), std::cos(3 * x.x) * std::sin(3 * x.y)};
  };
  p.grad_u = [](const Vec2& x) {
    const double cc = 3 * std::cos(3 * x.x) * std::cos(3 * x.y), ss = 3 * std::sin(3 * x.x) * std::sin(3 * x.y);
    return Mat2{cc, -ss, -ss, cc};
  };
  p.sigma = [m](const Vec2& x) {
    const double cc = std::cos(3 * x.x) * std::cos(3 * x.y), ss = std::sin(3 * x.x) * std::sin(3 * x.y);
    return SymTensor2{6 * (m.mu + m.lambda) * cc, -6 * m.mu * ss, 6 * (m.mu + m.lambda) * cc};
  };
  p.f = [m, u = p.u](const Vec2& x) { return (18 * (2 * m.mu + m.lambda)) * u(x); };
  p.boundary = boundary_data_from_exact(p.u, p.sigma);
  p.coarse_mesh = [tags](int n) { return build_unit_square_mesh(n, tags); };
  p.pure_dirichlet = is_pure_dirichlet(tags);
  return p;
}

/// Linear displacement with constant stress and f = 0.
inline ManufacturedProblem linear_patch_problem(const Material& m, const SideTags& tags) {
  ManufacturedProblem p;
  p.name = "patch";
  p.material = m;
  const Mat2 G{0.5, -0.2, 0.4, 0.7};
  const Vec2 c{0.3, -0.1};
  p.u = [G, c](const Vec2& x) { return G * x + c; };
  p.grad_u = [G](const Vec2&) { return G; };
  const SymTensor2 s = apply_elasticity(m, sym(G));
  p.sigma = [s](const Vec2&) { return s; };
  p.f = [](const Vec2&) { return Vec2{}; };
  p.boundary = boundary_data_from_exact(p.u, p.sigma);
  p.coarse_mesh = [tags](int n) { return build_unit_square_mesh(n, tags); };
  p.pure_dirichlet = is_pure_dirichlet(tags);
  return p;
}

struct SingularExponent {
  double alpha{0.0};
  double omega{0.0};
  double G{0.0};

  /// sin^2(alpha omega) - alpha^2 G^2 / (G - 2)^2 sin^2(omega)
  static double characteristic(double a, double omega, double G) {
    const double k = G * G / ((G - 2) * (G - 2));
    const double s = std::sin(a * omega), so = std::sin(omega);
    return s * s - a * a * k * so * so;
  }
  double residual() const { return characteristic(alpha, omega, G); }
};

/// Smallest root in (0.01, 0.99) of the corner characteristic equation: scan for the
/// first sign change, bisect, then polish with Newton.
inline SingularExponent find_alpha(double omega, const Material& m) {
  SingularExponent r;
  r.omega = omega;
  r.G = -(m.lambda + m.mu) / m.mu;
  const auto F = [&](double a) { return SingularExponent::characteristic(a, omega, r.G); };
  const int steps = 980;
  double lo = 0.01, flo = F(lo), hi = -1.0;
  for (int k = 1; k <= steps; ++k) {
    const double a = 0.01 + 0.98 * k / steps;
    const double fa = F(a);
    if ((flo < 0) != (fa < 0)) {
      hi = a;
      break;
    }
    lo = a;
    flo = fa;
  }
  if (hi < 0) throw std::runtime_error("find_alpha: no sign change of the characteristic function in (0.01, 0.99)");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((F(mid) < 0) == (flo < 0)) {
      lo = mid;
      flo = F(mid);
    } else {
      hi = mid;
    }
  }
  double a = 0.5 * (lo + hi);
  const double k = r.G * r.G / ((r.G - 2) * (r.G - 2)) * std::sin(omega) * std::sin(omega);
  for (int it = 0; it < 5; ++it) {
    const double d = 2 * std::sin(a * omega) * std::cos(a * omega) * omega - 2 * a * k;
    if (d == 0.0) break;
    const double step = F(a) / d;
    if (!(std::abs(step) < 1e-8)) break;
    a -= step;
  }
  r.alpha = a;
  return r;
}

/// Polar angle in [0, 2 pi); the L-shaped domain covers [0, 3 pi / 2].
inline double polar_angle(const Vec2& x) {
  double p = std::atan2(x.y, x.x);
  if (p < 0) p += 2 * std::numbers::pi;
  return p;
}

/// Corner singularity r^alpha (C1 v1 + C2 v2) at the reentrant corner of the
/// L-shaped domain, with Cartesian components. Body force zero, clamped everywhere.
inline ManufacturedProblem lshape_singular_problem(const Material& m) {
  const double omega = 1.5 * std::numbers::pi;
  const SingularExponent se = find_alpha(omega, m);
  const double a = se.alpha;
  const double A = 2 * (m.lambda + 3 * m.mu) / ((m.lambda + m.mu) * a);
  const double C1 = -std::cos(a * omega) + std::cos((a - 2) * omega);
  const double C2 = -(1 - A) * std::sin(a * omega) + std::sin((a - 2) * omega);

  // angular profile g(phi) and its derivative
  const auto g = [=](double p) {
    const double ca = std::cos(a * p), sa = std::sin(a * p), cb = std::cos((a - 2) * p), sb = std::sin((a - 2) * p);
    const Vec2 v1{-ca + cb, (1 - A) * sa - sb};
    const Vec2 v2{-(1 + A) * sa + sb, -ca + cb};
    return C1 * v1 + C2 * v2;
  };
  const auto dg = [=](double p) {
    const double ca = std::cos(a * p), sa = std::sin(a * p), cb = std::cos((a - 2) * p), sb = std::sin((a - 2) * p);
    const Vec2 v1{a * sa - (a - 2) * sb, (1 - A) * a * ca - (a - 2) * cb};
    const Vec2 v2{-(1 + A) * a * ca + (a - 2) * cb, a * sa - (a - 2) * sb};
    return C1 * v1 + C2 * v2;
  };

  ManufacturedProblem p;
  p.name = "lshape";
  p.material = m;
  p.alpha = a;
  p.u = [=](const Vec2& x) {
    const double r = norm(x);
    if (r == 0.0) return Vec2{};
    return std::pow(r, a) * g(polar_angle(x));
  };
  p.grad_u = [=](const Vec2& x) {
    const double r = norm(x);
    if (r == 0.0) throw std::domain_error("lshape_singular_problem: gradient is singular at the origin");
    const double phi = polar_angle(x);
    const double c = std::cos(phi), s = std::sin(phi);
    const double ra = std::pow(r, a - 1);
    const Vec2 dr = (a * ra) * g(phi);   // d/dr
    const Vec2 dt = ra * dg(phi);        // (1/r) d/dphi
    const Vec2 dx = c * dr - s * dt, dy = s * dr + c * dt;
    return Mat2{dx.x, dy.x, dx.y, dy.y};
  };
  p.sigma = [m, grad = p.grad_u](const Vec2& x) { return apply_elasticity(m, sym(grad(x))); };
  p.f = [](const Vec2&) { return Vec2{}; };
  p.boundary = boundary_data_from_exact(p.u, p.sigma);
  p.coarse_mesh = [](int n) { return build_lshape_mesh(n); };
  p.pure_dirichlet = true;
  return p;
}

}  // namespace nnelast
