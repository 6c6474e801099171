/**
 * @file quadrature.hpp
 * @brief Quadrature on triangles (barycentric points) and on edges (parameter in [0, 1]).
 *
 * Weights are normalized to sum to one; callers multiply by the measure of the
 * physical triangle or edge.
 */
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nnelast {

struct TriangleRule {
  std::vector<std::array<double, 3>> points;  ///< barycentric coordinates
  std::vector<double> weights;
  int degree{0};

  std::size_t size() const { return weights.size(); }
};

struct EdgeRule {
  std::vector<double> points;  ///< parameter s in [0, 1]
  std::vector<double> weights;
  int degree{0};

  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule with n points mapped to [0, 1].
inline EdgeRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  EdgeRule r;
  r.degree = 2 * n - 1;
  r.points.resize(n);
  r.weights.resize(n);
  const auto legendre = [n](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    r.points[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

/// Three interior points (2/3, 1/6, 1/6), exact for quadratics.
inline const TriangleRule& triangle_rule_3pt() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.degree = 2;
    const double a = 2.0 / 3.0, b = 1.0 / 6.0;
    r.points = {{a, b, b}, {b, a, b}, {b, b, a}};
    r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return r;
  }();
  return rule;
}

/// Symmetric seven-point rule, exact for polynomials of degree 5.
inline const TriangleRule& triangle_rule_7pt() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.degree = 5;
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0, w2 = (155.0 + s15) / 1200.0;
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                {b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1},
                {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

/// Collapsed (Duffy) tensor-product Gauss rule with n points per direction,
/// exact for polynomials of degree 2n - 2.
inline TriangleRule triangle_rule_collapsed(int n) {
  const EdgeRule g = gauss_legendre(n);
  TriangleRule r;
  r.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.points[i];
      const double v = g.points[j];
      const double xi = u;
      const double eta = v * (1.0 - u);
      r.points.push_back({1.0 - xi - eta, xi, eta});
      r.weights.push_back(2.0 * g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return r;
}

}  // namespace nnelast
