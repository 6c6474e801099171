#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nnelast/problem.hpp"

namespace nnelast {
namespace {

const Material kMat = material_from_engineering(1.0, 0.3);

Mat2 fd_gradient(const std::function<Vec2(const Vec2&)>& u, const Vec2& x, double h = 1e-6) {
  const Vec2 dx = (u(x + Vec2{h, 0}) - u(x - Vec2{h, 0})) / (2 * h);
  const Vec2 dy = (u(x + Vec2{0, h}) - u(x - Vec2{0, h})) / (2 * h);
  return {dx.x, dy.x, dx.y, dy.y};
}

Vec2 fd_divergence(const std::function<SymTensor2(const Vec2&)>& s, const Vec2& x, double h = 1e-5) {
  const SymTensor2 dx = (1.0 / (2 * h)) * (s(x + Vec2{h, 0}) - s(x - Vec2{h, 0}));
  const SymTensor2 dy = (1.0 / (2 * h)) * (s(x + Vec2{0, h}) - s(x - Vec2{0, h}));
  return {dx.a11 + dy.a12, dx.a12 + dy.a22};
}

double max_abs(const Mat2& m) {
  return std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a21), std::abs(m.a22)});
}

TEST(SmoothProblem, GradientMatchesFiniteDifferences) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec2 x{d(rng), d(rng)};
    const Mat2 G = p.grad_u(x), F = fd_gradient(p.u, x);
    EXPECT_LT(max_abs(G + (-1.0) * F), 1e-6);
    // the shear strain does not vanish
    const SymTensor2 e = p.strain(x);
    EXPECT_NEAR(e.a12, -3 * std::sin(3 * x.x) * std::sin(3 * x.y), 1e-12);
  }
}

TEST(SmoothProblem, TraceAndDeviator) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  for (const Vec2 x : {Vec2{0.1, 0.2}, Vec2{0.7, 0.4}, Vec2{0.9, 0.95}}) {
    const double cc = std::cos(3 * x.x) * std::cos(3 * x.y), ss = std::sin(3 * x.x) * std::sin(3 * x.y);
    const SymTensor2 s = p.sigma(x);
    EXPECT_NEAR(s.trace(), 12 * (kMat.mu + kMat.lambda) * cc, 1e-12);
    EXPECT_NEAR(s.dev().a11, 0.0, 1e-12);
    EXPECT_NEAR(s.dev().a22, 0.0, 1e-12);
    EXPECT_NEAR(s.dev().a12, -6 * kMat.mu * ss, 1e-12);
    // sigma is the elasticity tensor applied to the strain
    const SymTensor2 c = apply_elasticity(kMat, p.strain(x));
    EXPECT_NEAR(frobenius_norm(c - s), 0.0, 1e-12);
  }
}

TEST(SmoothProblem, BodyForceBalancesStress) {
  for (double nu : {0.3, 0.4999999}) {
    const ManufacturedProblem p = smooth_square_problem(material_from_engineering(1.0, nu));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(0.05, 0.95);
    for (int k = 0; k < 50; ++k) {
      const Vec2 x{d(rng), d(rng)};
      const Vec2 r = fd_divergence(p.sigma, x) + p.f(x);
      EXPECT_LT(norm(r), 1e-4 * norm(p.f(x)) + 1e-8) << "nu " << nu;
    }
  }
}

TEST(SmoothProblem, VanishingBoundaryData) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  const BoundaryData& b = p.boundary;
  const Vec2 nb{0, -1}, tb{1, 0}, nl{-1, 0}, tl{0, -1}, nr{1, 0}, tr{0, 1}, nt{0, 1}, tt{-1, 0};
  double bottom_un = 0, left_un = 0, bottom_tn = 0, left_tn = 0;
  double right_un = 0, top_un = 0, right_tn = 0, top_tn = 0, bottom_ut = 0, left_nn = 0;
  for (int k = 1; k < 10; ++k) {
    const double s = 0.1 * k;
    bottom_un = std::max(bottom_un, std::abs(b.g_Dn({s, 0}, nb)));
    left_un = std::max(left_un, std::abs(b.g_Dn({0, s}, nl)));
    bottom_tn = std::max(bottom_tn, std::abs(b.g_Nt({s, 0}, nb, tb)));
    left_tn = std::max(left_tn, std::abs(b.g_Nt({0, s}, nl, tl)));
    right_un = std::max(right_un, std::abs(b.g_Dn({1, s}, nr)));
    top_un = std::max(top_un, std::abs(b.g_Dn({s, 1}, nt)));
    right_tn = std::max(right_tn, std::abs(b.g_Nt({1, s}, nr, tr)));
    top_tn = std::max(top_tn, std::abs(b.g_Nt({s, 1}, nt, tt)));
    bottom_ut = std::max(bottom_ut, std::abs(b.g_Dt({s, 0}, tb)));
    left_nn = std::max(left_nn, std::abs(b.g_Nn({0, s}, nl)));
  }
  // normal displacement and tangential traction vanish on the sides through the origin
  EXPECT_LT(bottom_un, 1e-15);
  EXPECT_LT(left_un, 1e-15);
  EXPECT_LT(bottom_tn, 1e-15);
  EXPECT_LT(left_tn, 1e-15);
  for (double v : {right_un, top_un, right_tn, top_tn, bottom_ut, left_nn}) EXPECT_GT(v, 1e-2);
}

TEST(SmoothProblem, BoundaryDataAreConsistent) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  const BoundaryData& b = p.boundary;
  const Vec2 x{0.3, 0.8}, n{0.6, 0.8}, t = rotate_cw(n);
  EXPECT_NEAR(b.g_Dn(x, n), dot(b.g_D(x), n), 1e-15);
  EXPECT_NEAR(b.g_Dt(x, t), dot(b.g_D(x), t), 1e-15);
  EXPECT_NEAR(b.g_Nn(x, n), dot(b.g_N(x, n), n), 1e-14);
  EXPECT_NEAR(b.g_Nt(x, n, t), dot(b.g_N(x, n), t), 1e-14);
}

TEST(SmoothProblem, TagsAndMesh) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  EXPECT_FALSE(p.pure_dirichlet);
  EXPECT_FALSE(p.alpha);
  const Triangulation mesh = p.coarse_mesh(2);
  EXPECT_EQ(mesh.num_triangles(), 8u);
  for (auto t : {BoundaryTag::hc, BoundaryTag::sc, BoundaryTag::ss, BoundaryTag::sf}) EXPECT_TRUE(mesh.has_tag(t));
  EXPECT_TRUE(is_pure_dirichlet(SideTags::all(BoundaryTag::hc)));
  EXPECT_TRUE(is_pure_dirichlet({BoundaryTag::hc, BoundaryTag::sc, BoundaryTag::sc, BoundaryTag::hc}));
  EXPECT_FALSE(is_pure_dirichlet({BoundaryTag::hc, BoundaryTag::sc, BoundaryTag::ss, BoundaryTag::hc}));
}

TEST(PatchProblem, ConstantStressNoLoad) {
  const ManufacturedProblem p = linear_patch_problem(kMat, mixed_square_tags());
  const SymTensor2 s0 = p.sigma({0, 0});
  for (const Vec2 x : {Vec2{0.3, 0.1}, Vec2{0.9, 0.5}}) {
    EXPECT_EQ(p.sigma(x).a11, s0.a11);
    EXPECT_EQ(norm(p.f(x)), 0.0);
    EXPECT_LT(max_abs(p.grad_u(x) + (-1.0) * fd_gradient(p.u, x)), 1e-8);
  }
}

TEST(SingularExponent, ReproducesTheLShapeValue) {
  const SingularExponent se = find_alpha(1.5 * std::numbers::pi, kMat);
  EXPECT_NEAR(se.alpha, 0.59516, 5e-5);
  EXPECT_LE(std::abs(se.residual()), 1e-12);
  EXPECT_NEAR(se.G, -(kMat.lambda + kMat.mu) / kMat.mu, 1e-15);
  // no smaller root: the characteristic function keeps its sign below alpha
  const double f0 = SingularExponent::characteristic(0.01, se.omega, se.G);
  for (double a = 0.01; a < se.alpha - 1e-6; a += 1e-3)
    EXPECT_EQ(SingularExponent::characteristic(a, se.omega, se.G) < 0, f0 < 0) << a;
}

TEST(SingularExponent, DependsContinuouslyOnPoisson) {
  double prev = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double nu = 0.25 + 0.005 * k;
    const SingularExponent se = find_alpha(1.5 * std::numbers::pi, material_from_engineering(1.0, nu));
    EXPECT_LE(std::abs(se.residual()), 1e-12);
    if (k > 0) {
      EXPECT_LT(se.alpha, prev) << "nu " << nu;
      EXPECT_LT(prev - se.alpha, 2e-3);
    }
    prev = se.alpha;
  }
}

TEST(SingularExponent, ConvexCornerHasNoRootBelowOne) {
  EXPECT_THROW(find_alpha(0.5 * std::numbers::pi, kMat), std::runtime_error);
}

TEST(LShapeProblem, VanishesOnTheReentrantEdges) {
  const ManufacturedProblem p = lshape_singular_problem(kMat);
  ASSERT_TRUE(p.alpha);
  for (int k = 1; k <= 10; ++k) {
    const double r = 0.1 * k;
    const double scale = std::pow(r, *p.alpha);
    EXPECT_LT(norm(p.u({r, 0.0})), 1e-10 * scale);
    EXPECT_LT(norm(p.u({0.0, -r})), 1e-10 * scale);
  }
  // the solution is nontrivial elsewhere
  EXPECT_GT(norm(p.u({-0.5, 0.5})), 1e-2);
  EXPECT_EQ(norm(p.u({0.0, 0.0})), 0.0);
  EXPECT_THROW(p.grad_u({0.0, 0.0}), std::domain_error);
}

TEST(LShapeProblem, IsHomogeneous) {
  const ManufacturedProblem p = lshape_singular_problem(kMat);
  for (const Vec2 x : {Vec2{0.2, 0.1}, Vec2{-0.3, 0.2}, Vec2{-0.2, -0.4}}) {
    const Vec2 a = p.u(x), b = p.u(2.0 * x);
    EXPECT_NEAR(norm(b) / norm(a), std::pow(2.0, *p.alpha), 1e-12);
  }
}

TEST(LShapeProblem, GradientAndEquilibrium) {
  const ManufacturedProblem p = lshape_singular_problem(kMat);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  int tested = 0;
  while (tested < 50) {
    const Vec2 x{d(rng), d(rng)};
    if (norm(x) < 0.1 || (x.x > -0.02 && x.y < 0.02)) continue;  // stay clear of the corner and the cut
    ++tested;
    const Mat2 G = p.grad_u(x), F = fd_gradient(p.u, x);
    EXPECT_LT(max_abs(G + (-1.0) * F), 1e-6 * (1 + max_abs(G)));
    EXPECT_LT(norm(fd_divergence(p.sigma, x)), 1e-4 * frobenius_norm(p.sigma(x)));
    EXPECT_EQ(norm(p.f(x)), 0.0);
  }
  EXPECT_TRUE(p.pure_dirichlet);
  EXPECT_EQ(p.coarse_mesh(1).num_triangles(), 6u);
}

TEST(PolarAngle, Branch) {
  EXPECT_NEAR(polar_angle({1, 0}), 0.0, 1e-15);
  EXPECT_NEAR(polar_angle({0, 1}), 0.5 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(polar_angle({-1, 0}), std::numbers::pi, 1e-15);
  EXPECT_NEAR(polar_angle({0, -1}), 1.5 * std::numbers::pi, 1e-15);
}

}  // namespace
}  // namespace nnelast
