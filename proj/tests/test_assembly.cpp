#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <numeric>
#include <random>

#include "nnelast/analysis.hpp"
#include "nnelast/assembly.hpp"
#include "nnelast/verify.hpp"

namespace nnelast {
namespace {

const Material kMat = material_from_engineering(1.0, 0.3);

TEST(Threads, EnvironmentCapsRequests) {
  setenv("NN_ELAST_THREADS", "2", 1);
  EXPECT_EQ(thread_count(8), 2u);
  EXPECT_EQ(thread_count(1), 1u);
  EXPECT_LE(thread_count(0), 2u);
  setenv("NN_ELAST_THREADS", "garbage", 1);
  EXPECT_GE(thread_count(0), 1u);
  unsetenv("NN_ELAST_THREADS");
}

TEST(Threads, ParallelForVisitsEachIndexOnce) {
  std::vector<std::atomic<int>> hits(1001);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(LocalSystem, ComplianceBlockIsSymmetricPositiveDefinite) {
  std::mt19937_64 rng(1);
  const ElementGeometry g(random_triangle(rng, 15.0));
  const LocalSystem ls = local_system(g, kMat, [](const Vec2&) { return Vec2{}; }, triangle_rule_3pt());
  EXPECT_LT((ls.A - ls.A.transpose()).norm(), 1e-14 * ls.A.norm());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix15>(ls.A).eigenvalues().minCoeff(), 0.0);

  // d^T A d is the compliance energy of the field with DOFs d
  Vector15 d = Vector15::Random();
  const StressElement el(g);
  const LocalStress s{g, el.coefficients_from_dofs(d)};
  double energy = 0.0;
  const TriangleRule rule = triangle_rule_collapsed(6);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const SymTensor2 v = s(g.point(rule.points[q]));
    energy += rule.weights[q] * g.area() * frobenius(apply_compliance(kMat, v), v);
  }
  EXPECT_NEAR(d.dot(ls.A * d), energy, 1e-11 * energy);
}

TEST(LocalSystem, IntegrationByParts) {
  // (div tau, v)_T = <tau n, v>_dT - (tau, eps(v))_T, so B1 d + B2 d + (tau, eps(l_j e_d)) = 0
  std::mt19937_64 rng(2);
  const ElementGeometry g(random_triangle(rng, 15.0));
  const LocalSystem ls = local_system(g, kMat, [](const Vec2&) { return Vec2{}; }, triangle_rule_3pt());
  const Vector15 d = Vector15::Random();
  const StressElement el(g);
  const LocalStress s{g, el.coefficients_from_dofs(d)};
  Vector6 volume = Vector6::Zero();
  const TriangleRule rule = triangle_rule_collapsed(5);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = g.point(rule.points[q]);
    const double w = rule.weights[q] * g.area();
    for (int j = 0; j < 3; ++j) {
      const Vec2 tg = s(x) * g.grad_lambda(j);
      volume(2 * j) += w * tg.x;
      volume(2 * j + 1) += w * tg.y;
    }
  }
  EXPECT_LT((ls.B1 * d + ls.B2 * d + volume).norm(), 1e-11 * (1.0 + volume.norm()));
  // the divergence moments are DOFs 9..14
  for (int k = 0; k < 6; ++k) EXPECT_NEAR((ls.B1 * d)(k), d(9 + k), 1e-11);
}

TEST(LocalSystem, ConstantLoad) {
  std::mt19937_64 rng(3);
  const ElementGeometry g(random_triangle(rng, 15.0));
  for (const TriangleRule* rule : {&triangle_rule_3pt(), &triangle_rule_7pt()}) {
    const LocalSystem ls = local_system(g, kMat, [](const Vec2&) { return Vec2{2.0, -1.0}; }, *rule);
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(ls.load(2 * j), -2.0 * g.area() / 3, 1e-14);
      EXPECT_NEAR(ls.load(2 * j + 1), g.area() / 3, 1e-14);
    }
  }
}

TEST(Neumann, ConstantTractionOnStressFreeSides) {
  const Triangulation mesh = build_unit_square_mesh(3, SideTags::all(BoundaryTag::sf));
  BoundaryData data;
  data.g_N = [](const Vec2&, const Vec2& n) { return Vec2{1.0 + 0.0 * n.x, 0.5}; };
  const Eigen::VectorXd N = neumann_moments(mesh, data);
  double sx = 0, sy = 0;
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    sx += N(2 * v);
    sy += N(2 * v + 1);
  }
  EXPECT_NEAR(sx, 4.0, 1e-14);
  EXPECT_NEAR(sy, 2.0, 1e-14);
  // clamped sides carry no Neumann data
  EXPECT_EQ(neumann_moments(build_unit_square_mesh(3), BoundaryData{}).norm(), 0.0);
}

TEST(Assembly, BlockStructure) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  const Triangulation mesh = p.coarse_mesh(3);
  const SaddleSystem sys = assemble(mesh, p);
  const DofMap& dm = sys.dofs;
  EXPECT_EQ(sys.K_full.rows(), dm.total());
  EXPECT_EQ(sys.reduced_size(), dm.total() - sys.constraints.num_constrained_scalars());
  EXPECT_LE(asymmetry(sys.K), 1e-12);
  EXPECT_LE(asymmetry(sys.K_full), 1e-12);
  const int s = dm.stress_size();
  double lower = 0.0;
  for (int k = s; k < sys.K_full.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.K_full, k); it; ++it)
      if (it.row() >= s) lower = std::max(lower, std::abs(it.value()));
  EXPECT_EQ(lower, 0.0);
  // expand and restrict are inverse on constrained vectors
  const Eigen::VectorXd y = Eigen::VectorXd::Random(sys.reduced_size());
  EXPECT_LT((sys.restrict(sys.expand(y)) - y).norm(), 1e-14 * y.norm());
}

TEST(Assembly, ConstrainedTraceEqualsDirichletInterpolant) {
  const ManufacturedProblem p = smooth_square_problem(kMat, SideTags::all(BoundaryTag::hc));
  const Triangulation mesh = p.coarse_mesh(3);
  const SaddleSystem sys = assemble(mesh, p);
  const DiscreteSolution sol = solve(sys);
  for (const Edge& e : mesh.edges()) {
    if (!e.is_boundary()) continue;
    for (int v : e.v) {
      const Vec2 u = p.u(mesh.x(v));
      EXPECT_NEAR(sol.x(sys.dofs.trace_dof(v, 0)), u.x, 1e-14);
      EXPECT_NEAR(sol.x(sys.dofs.trace_dof(v, 1)), u.y, 1e-14);
    }
  }
}

TEST(Assembly, ExactInterpolantSatisfiesDivergenceRows) {
  // with f in P1 per element the 7-point rule is exact and the rows hold to round-off
  ManufacturedProblem p = linear_patch_problem(kMat, mixed_square_tags());
  const Vec2 f0{0.3, -0.2};
  p.f = [f0](const Vec2&) { return f0; };
  p.sigma = [s = p.sigma, f0](const Vec2& x) { return s(x) + SymTensor2{-f0.x * x.x, 0.0, -f0.y * x.y}; };
  const Triangulation mesh = p.coarse_mesh(3);
  AssemblyOptions opt;
  opt.load_rule = &triangle_rule_7pt();
  const SaddleSystem sys = assemble(mesh, p, opt);
  const Eigen::VectorXd x = interpolate_exact(mesh, sys.dofs, p);
  const Eigen::VectorXd r = sys.K_full * x - sys.b_full;
  EXPECT_LT(r.segment(sys.dofs.displacement_offset(), sys.dofs.displacement_size()).norm(), 1e-13);
}

TEST(Assembly, InterpolationAgreesAcrossEdges) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  const Triangulation mesh = p.coarse_mesh(2);
  const TensorField sigma{p.sigma, [&p](const Vec2& x) { return p.div_sigma(x); }};
  for (const Edge& e : mesh.edges()) {
    if (e.is_boundary()) continue;
    double m[2][2];
    for (int side = 0; side < 2; ++side) {
      const int t = e.adjacent[side];
      const Vector15 d = local_dofs(element_geometry(mesh, t), sigma);
      const Triangle& tri = mesh.triangle(t);
      for (int i = 0; i < 3; ++i)
        if (tri.e[i] == e.id) {
          m[side][0] = d(2 * i);
          m[side][1] = d(2 * i + 1);
        }
    }
    EXPECT_NEAR(m[0][0], m[1][0], 1e-13);
    EXPECT_NEAR(m[0][1], m[1][1], 1e-13);
  }
}

TEST(Assembly, OrderAndThreadIndependence) {
  const ManufacturedProblem p = smooth_square_problem(kMat);
  const Triangulation mesh = p.coarse_mesh(4);
  AssemblyOptions a;
  a.threads = 1;
  AssemblyOptions b;
  b.threads = 3;
  b.element_order.resize(mesh.num_triangles());
  std::iota(b.element_order.rbegin(), b.element_order.rend(), 0);
  const SaddleSystem sa = assemble(mesh, p, a), sb = assemble(mesh, p, b);
  EXPECT_LE(SparseMatrix(sa.K - sb.K).norm(), 1e-14 * sa.K.norm());
  EXPECT_LE((sa.b - sb.b).norm(), 1e-14 * sa.b.norm());
  AssemblyOptions bad;
  bad.element_order = {0, 1};
  EXPECT_THROW(assemble(mesh, p, bad), std::invalid_argument);
}

TEST(TraceIdentity, HoldsForPureDirichletProblems) {
  for (const ManufacturedProblem& p :
       {smooth_square_problem(kMat, SideTags::all(BoundaryTag::hc)),
        smooth_square_problem(kMat, {BoundaryTag::hc, BoundaryTag::sc, BoundaryTag::sc, BoundaryTag::hc}),
        lshape_singular_problem(kMat)}) {
    const Triangulation mesh = refine_uniform(p.coarse_mesh(2));
    const SaddleSystem sys = assemble(mesh, p);
    const DiscreteSolution sol = solve(sys);
    const TraceIdentity ti = trace_identity(mesh, sys.dofs, sol.x, p.material);
    EXPECT_LE(ti.relative_defect(), 1e-9) << p.name << " lhs " << ti.lhs << " rhs " << ti.rhs;
    EXPECT_GT(ti.scale, 0.0);
  }
}

TEST(Correction, LinearDataNeedNoCorrection) {
  const ManufacturedProblem p = linear_patch_problem(kMat, SideTags::all(BoundaryTag::hc));
  const Triangulation mesh = p.coarse_mesh(2);
  const CorrectionTensors c = correction_tensors(mesh, p);
  ASSERT_TRUE(c.active);
  EXPECT_NEAR(frobenius_norm(c.sigma0 - c.sigma0h), 0.0, 1e-13);
  // <u.n, 1>_Gamma = int div u
  const Mat2 G = p.grad_u({0, 0});
  EXPECT_NEAR(c.sigma0.a11, (kMat.lambda + kMat.mu) * (G.a11 + G.a22), 1e-12);
}

TEST(Correction, ShiftsOnlyTheStress) {
  const ManufacturedProblem p = smooth_square_problem(kMat, SideTags::all(BoundaryTag::hc));
  const Triangulation mesh = p.coarse_mesh(2);
  const SaddleSystem sys = assemble(mesh, p);
  const DiscreteSolution sol = solve(sys);
  const CorrectionTensors c = correction_tensors(mesh, p);
  ASSERT_TRUE(c.active);
  EXPECT_GT(frobenius_norm(c.sigma0 - c.sigma0h), 1e-6);
  const Eigen::VectorXd y = corrected_stress(mesh, sys.dofs, sol.x, c, true, true);
  const int s = sys.dofs.stress_size();
  EXPECT_EQ((y.tail(y.size() - s) - sol.x.tail(y.size() - s)).norm(), 0.0);
  const LocalStress a = local_stress(mesh, sys.dofs, sol.x, 0), b = local_stress(mesh, sys.dofs, y, 0);
  const Vec2 x = a.geometry.point({0.2, 0.5, 0.3});
  EXPECT_NEAR(frobenius_norm(b(x) - a(x) - (c.sigma0 - c.sigma0h)), 0.0, 1e-12);
  EXPECT_EQ(corrected_stress(mesh, sys.dofs, sol.x, c, true, false), sol.x);
  // inactive with simply supported or stress free pieces
  const ManufacturedProblem mixed = smooth_square_problem(kMat);
  EXPECT_FALSE(correction_tensors(mixed.coarse_mesh(2), mixed).active);
}

TEST(Patch, ExactOnEveryRotationAndLevel) {
  for (const SideTags& tags : rotated_mixed_tags())
    for (int n : {1, 2, 4, 8}) {
      const PatchErrors e = patch_errors(tags, n);
      const std::string where = tags_label(tags) + " n=" + std::to_string(n);
      EXPECT_LE(e.errors.sigma, 1e-9) << where;
      EXPECT_LE(e.errors.div, 1e-9) << where;
      EXPECT_LE(e.errors.u, 1e-9) << where;
      EXPECT_LE(e.errors.strain, 1e-9) << where;
      EXPECT_LE(e.trace, 1e-9) << where;
    }
}

TEST(Patch, ExactWhenNearlyIncompressible) {
  const Material m = material_from_engineering(1.0, 0.4999999);
  const PatchErrors e = patch_errors(mixed_square_tags(), 4, m);
  const double scale = frobenius_norm(linear_patch_problem(m, mixed_square_tags()).sigma({0, 0}));
  // round-off grows with lambda / mu
  const double tol = 1e-14 * m.lambda / m.mu;
  EXPECT_LE(e.errors.u, tol);
  EXPECT_LE(e.errors.strain, tol);
  EXPECT_LE(e.errors.sigma, 1e-12 * scale);
}

}  // namespace
}  // namespace nnelast
