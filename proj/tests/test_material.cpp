#include <gtest/gtest.h>

#include <random>

#include "nnelast/material.hpp"

namespace nnelast {
namespace {

SymTensor2 random_tensor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return {d(rng), d(rng), d(rng)};
}

TEST(Material, LameConstantsFromEngineeringData) {
  const Material m = material_from_engineering(1.0, 0.3);
  EXPECT_NEAR(m.mu, 5.0 / 13.0, 1e-15);
  EXPECT_NEAR(m.lambda, 15.0 / 26.0, 1e-15);

  const Material q = material_from_engineering(2.0, 0.25);
  EXPECT_NEAR(q.mu, 0.8, 1e-15);
  EXPECT_NEAR(q.lambda, 0.8, 1e-15);
}

TEST(Material, NearlyIncompressibleLambda) {
  // exact rational evaluation of E nu / ((1 + nu)(1 - 2 nu)) at nu = 4999999 / 10^7
  const Material m = material_from_engineering(1.0, 0.4999999);
  EXPECT_NEAR(m.lambda / 1666666.4444444296, 1.0, 1e-9);
  EXPECT_NEAR(m.mu, 0.33333335555555704, 1e-15);
}

TEST(Material, RejectsInvalidParameters) {
  EXPECT_THROW(material_from_engineering(1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(material_from_engineering(1.0, 0.6), std::invalid_argument);
  EXPECT_THROW(material_from_engineering(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(material_from_engineering(0.0, 0.3), std::invalid_argument);
}

TEST(Material, ComplianceInvertsElasticity) {
  std::mt19937_64 rng(1);
  for (double nu : {0.3, 0.4999999}) {
    const Material m = material_from_engineering(1.0, nu);
    // round-off grows with the condition number (lambda + mu) / mu
    const double tol = 1e-14 * (1.0 + (m.lambda + m.mu) / m.mu);
    for (int k = 0; k < 100; ++k) {
      const SymTensor2 e = random_tensor(rng);
      const SymTensor2 back = apply_compliance(m, apply_elasticity(m, e));
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(back[c], e[c], tol);
      const SymTensor2 s = random_tensor(rng);
      const SymTensor2 s2 = apply_elasticity(m, apply_compliance(m, s));
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(s2[c], s[c], tol * frobenius_norm(s));
    }
  }
}

TEST(Material, ComplianceOfSpecialTensors) {
  const Material m = material_from_engineering(1.0, 0.3);
  const SymTensor2 aid = apply_compliance(m, SymTensor2::identity());
  EXPECT_NEAR(aid.a11, 1.0 / (2.0 * (m.lambda + m.mu)), 1e-15);
  EXPECT_NEAR(aid.a12, 0.0, 1e-15);
  EXPECT_NEAR(aid.a22, 1.0 / (2.0 * (m.lambda + m.mu)), 1e-15);

  const SymTensor2 shear = apply_compliance(m, {0.0, 1.0, 0.0});
  EXPECT_NEAR(shear.a11, 0.0, 1e-15);
  EXPECT_NEAR(shear.a12, 1.0 / (2.0 * m.mu), 1e-15);
  EXPECT_NEAR(shear.a22, 0.0, 1e-15);
}

TEST(Material, ElasticityMatchesLameForm) {
  std::mt19937_64 rng(2);
  const Material m = material_from_engineering(1.0, 0.3);
  const SymTensor2 sid = apply_elasticity(m, SymTensor2::identity());
  EXPECT_NEAR(sid.a11, 2.0 * (m.mu + m.lambda), 1e-14);
  EXPECT_NEAR(sid.a22, 2.0 * (m.mu + m.lambda), 1e-14);
  const SymTensor2 zero = apply_elasticity(m, {});
  EXPECT_EQ(zero.a11, 0.0);
  for (int k = 0; k < 50; ++k) {
    const SymTensor2 e = random_tensor(rng);
    const SymTensor2 lame = 2.0 * m.mu * e + m.lambda * e.trace() * SymTensor2::identity();
    const SymTensor2 voigt = apply_elasticity(m, e);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(voigt[c], lame[c], 1e-14);
  }
}

TEST(Material, EnergySplit) {
  const auto [d, tr] = energy_split(SymTensor2::identity());
  EXPECT_EQ(tr, 2.0);
  EXPECT_EQ(frobenius_norm(d), 0.0);

  const auto [d2, tr2] = energy_split({1.0, 0.0, -1.0});
  EXPECT_EQ(tr2, 0.0);
  EXPECT_EQ(d2.a11, 1.0);
  EXPECT_EQ(d2.a22, -1.0);
}

TEST(Material, ComplianceEnergyIdentityAndCoercivity) {
  std::mt19937_64 rng(3);
  for (double nu : {0.1, 0.3, 0.4999999}) {
    const Material m = material_from_engineering(1.0, nu);
    // round-off grows with the condition number (lambda + mu) / mu
    const double tol = 1e-14 * (1.0 + (m.lambda + m.mu) / m.mu);
    for (int k = 0; k < 100; ++k) {
      const SymTensor2 s = random_tensor(rng);
      const double lhs = frobenius(apply_compliance(m, s), s);
      EXPECT_NEAR(lhs, compliance_energy(m, s), 1e-13 * (1.0 + std::abs(lhs)));
      const SymTensor2 d = s.dev();
      EXPECT_GE(lhs, frobenius(d, d) / (2.0 * m.mu) - 1e-14);
    }
  }
}

}  // namespace
}  // namespace nnelast
