/**
 * @file material.hpp
 * @brief Isotropic plane elasticity: Lame constants, elasticity and compliance in Voigt form.
 */
#pragma once

#include <stdexcept>
#include <string>

#include "nnelast/tensor.hpp"

namespace nnelast {

struct Material {
  double E{1.0};
  double nu{0.3};
  double mu{0.0};
  double lambda{0.0};
};

/// Lame constants from Young's modulus and Poisson ratio. Rejects nu outside (0, 1/2).
inline Material material_from_engineering(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive, got " + std::to_string(E));
  if (!(nu > 0.0) || !(nu < 0.5))
    throw std::invalid_argument("Poisson ratio must lie in (0, 1/2), got " + std::to_string(nu));
  Material m;
  m.E = E;
  m.nu = nu;
  m.mu = E / (2.0 * (1.0 + nu));
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

/// sigma = C eps = 2 mu eps + lambda tr(eps) id, written as the Voigt matrix
/// [[2mu+lambda, 0, lambda], [0, 2mu, 0], [lambda, 0, 2mu+lambda]] on (e11, e12, e22).
inline SymTensor2 apply_elasticity(const Material& m, const SymTensor2& e) {
  const double dl = 2.0 * m.mu + m.lambda;
  return {dl * e.a11 + m.lambda * e.a22, 2.0 * m.mu * e.a12, m.lambda * e.a11 + dl * e.a22};
}

/// Compliance A = C^{-1} in the same Voigt convention.
inline SymTensor2 apply_compliance(const Material& m, const SymTensor2& s) {
  const double ml = m.mu + m.lambda;
  const double diag = (1.0 + m.mu / ml) / (4.0 * m.mu);
  const double off = -(m.lambda / ml) / (4.0 * m.mu);
  return {diag * s.a11 + off * s.a22, s.a12 / (2.0 * m.mu), off * s.a11 + diag * s.a22};
}

struct EnergySplit {
  SymTensor2 dev;
  double tr{0.0};
};

/// s = dev + (tr / 2) id.
inline EnergySplit energy_split(const SymTensor2& s) { return {s.dev(), s.trace()}; }

/// (A s):s evaluated through the dev/tr split, |dev s|^2 / (2 mu) + tr(s)^2 / (4 (lambda + mu)).
inline double compliance_energy(const Material& m, const SymTensor2& s) {
  const auto [d, tr] = energy_split(s);
  return frobenius(d, d) / (2.0 * m.mu) + tr * tr / (4.0 * (m.lambda + m.mu));
}

}  // namespace nnelast
