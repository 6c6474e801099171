/**
 * @file verify.hpp
 * @brief Seeded randomized property suites for the element, the reference
 * transforms and the global assembly. Each check is named after its invariant.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nnelast/analysis.hpp"
#include "nnelast/assembly.hpp"
#include "nnelast/element.hpp"
#include "nnelast/problem.hpp"

namespace nnelast {

struct VerifyCheck {
  std::string name;
  bool passed{false};
  double value{0.0};      ///< worst observed defect (or ratio, see detail)
  double tolerance{0.0};
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed{0};
  std::vector<VerifyCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
  }
  const VerifyCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  std::vector<std::string> failed() const {
    std::vector<std::string> r;
    for (const auto& c : checks)
      if (!c.passed) r.push_back(c.name);
    return r;
  }
};

inline nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json j{{"schema", "nnelast.verify/1"}, {"suite", r.suite}, {"seed", r.seed}, {"passed", r.passed()}};
  auto& cs = j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks)
    cs.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance},
                  {"detail", c.detail}});
  return j;
}

/// Counter-clockwise triangle with vertices in [-2, 2]^2 and all angles above
/// min_angle_deg.
template <class Rng>
std::array<Vec2, 3> random_triangle(Rng& rng, double min_angle_deg = 10.0) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  while (true) {
    std::array<Vec2, 3> x{Vec2{d(rng), d(rng)}, Vec2{d(rng), d(rng)}, Vec2{d(rng), d(rng)}};
    if (cross(x[1] - x[0], x[2] - x[0]) < 0.0) std::swap(x[1], x[2]);
    double smallest = 180.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = x[(i + 1) % 3] - x[i], b = x[(i + 2) % 3] - x[i];
      smallest = std::min(smallest, std::acos(dot(a, b) / (norm(a) * norm(b))) * 180.0 / M_PI);
    }
    if (smallest >= min_angle_deg && std::abs(cross(x[1] - x[0], x[2] - x[0])) > 1e-3) return x;
  }
}

namespace detail {

inline VerifyCheck upper_bound_check(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

inline double nn_trace(const SymTensor2& s, const Vec2& n) { return dot(n, s * n); }

inline std::array<Vec2, 3> mapped_reference(const AffineMap& map) {
  const auto& r = reference_vertices();
  return {map(r[0]), map(r[1]), map(r[2])};
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Unisolvency, duality, normal-normal trace structure, interpolation.
inline VerifyReport verify_element(std::uint64_t seed) {
  VerifyReport rep{"element", seed, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 1.0, duality = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const ElementGeometry g(random_triangle(rng, 15.0));
      const Matrix15 D = dof_matrix(g);
      const Eigen::JacobiSVD<Matrix15> svd(D);
      const auto& s = svd.singularValues();
      worst = std::min(worst, s(kStressDofs - 1) / s(0));
      duality = std::max(duality, (D * D.inverse() - Matrix15::Identity()).norm());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream d;
    d << "min sigma_min/sigma_max over 1000 triangles (min angle 15 deg), " << secs << " s";
    rep.checks.push_back({"unisolvency", worst > 1e-10 && secs < 5.0, worst, 1e-10, d.str()});
    rep.checks.push_back(detail::upper_bound_check("dof-duality", duality, 1e-9, "max ||D D^-1 - I||_F"));
  }

  {
    // nn traces: linear on each edge, and only edge shape functions of that edge are nonzero there
    double nonlinear = 0.0, leakage = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const ElementGeometry g(random_triangle(rng, 15.0));
      for (int k = 0; k < kStressDofs; ++k)
        for (int i = 0; i < 3; ++i) {
          const auto at = [&](double s) { return detail::nn_trace(eval_basis(g, g.edge_point(i, s))[k], g.normal(i)); };
          const double a = at(0.0), b = at(1.0);
          for (double s : {0.25, 0.5, 0.8}) {
            const double v = at(s);
            nonlinear = std::max(nonlinear, std::abs(v - ((1 - s) * a + s * b)));
            const bool carries = k < 6 && k / 2 == i;
            if (!carries) leakage = std::max(leakage, std::abs(v));
          }
        }
    }
    rep.checks.push_back(detail::upper_bound_check("nn-trace-linear", nonlinear, 1e-10,
                                                   "max deviation of n.tau n from its linear interpolant on edges"));
    rep.checks.push_back(detail::upper_bound_check("nn-trace-locality", leakage, 1e-10,
                                                   "max |n.tau n| of basis members on foreign edges"));
  }

  {
    double proj = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const ElementGeometry g(random_triangle(rng, 15.0));
      Vector15 c;
      for (int k = 0; k < kStressDofs; ++k) c(k) = unit(rng);
      const LocalStress s{g, c};
      proj = std::max(proj, (interpolate_local(g, s.field()).coefficients - c).norm() / c.norm());
    }
    rep.checks.push_back(detail::upper_bound_check("interpolation-projection", proj, 1e-12,
                                                   "max ||I tau_h - tau_h|| / ||tau_h|| in coefficients"));
  }

  {
    double commute = 0.0, moments = 0.0;
    const TriangleRule& tr = triangle_rule_7pt();
    const EdgeRule er = gauss_legendre(3);
    for (int trial = 0; trial < 100; ++trial) {
      const ElementGeometry g(random_triangle(rng, 15.0));
      const PolyTensor tau = PolyTensor::random(3, rng);
      const LocalStress I = interpolate_local(g, tau.field());
      double scale_div = 0.0, defect_div = 0.0;
      for (int j = 0; j < 3; ++j) {
        Vec2 m, ref;
        for (std::size_t q = 0; q < tr.size(); ++q) {
          const Barycentric& l = tr.points[q];
          const Vec2 p = g.point(l);
          const double w = tr.weights[q] * g.area() * l[j];
          m += w * (I.divergence(p) - tau.divergence(p));
          ref += w * tau.divergence(p);
        }
        defect_div = std::max(defect_div, norm(m));
        scale_div = std::max(scale_div, norm(ref));
      }
      commute = std::max(commute, defect_div / std::max(scale_div, 1e-300));
      double scale_nn = 0.0, defect_nn = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 2; ++k) {
          double m = 0.0, ref = 0.0;
          for (std::size_t q = 0; q < er.size(); ++q) {
            const Vec2 p = g.edge_point(i, er.points[q]);
            const double w = er.weights[q] * edge_test_function(k, er.points[q]);
            m += w * detail::nn_trace(I(p) - tau(p), g.normal(i));
            ref += w * detail::nn_trace(tau(p), g.normal(i));
          }
          defect_nn = std::max(defect_nn, std::abs(m));
          scale_nn = std::max(scale_nn, std::abs(ref));
        }
      moments = std::max(moments, defect_nn / std::max(scale_nn, 1e-300));
    }
    rep.checks.push_back(detail::upper_bound_check("interpolation-commutes-with-div", commute, 1e-10,
                                                   "max relative defect of (div(I tau - tau), v) over 100 cubic fields"));
    rep.checks.push_back(detail::upper_bound_check("boundary-moment-conservation", moments, 1e-10,
                                                   "max relative defect of <n.(I tau - tau)n, q>_e, q in P1"));
  }
  return rep;
}

// ---------------------------------------------------------------------------

/// Pairings and DOFs under the contravariant/covariant transforms; 100 random maps.
inline VerifyReport verify_transforms(std::uint64_t seed) {
  VerifyReport rep{"transforms", seed, {}};
  std::mt19937_64 rng(seed);
  const TriangleRule rule = triangle_rule_collapsed(7);
  const EdgeRule er = gauss_legendre(5);
  const ElementGeometry ghat(reference_vertices());
  double dofs = 0.0, stress_strain = 0.0, div_disp = 0.0, boundary = 0.0, strain = 0.0, interp = 0.0;

  for (int trial = 0; trial < 100; ++trial) {
    const AffineMap map = AffineMap::from_vertices(random_triangle(rng, 15.0));
    const ElementGeometry g(detail::mapped_reference(map));

    const PolyTensor ref = PolyTensor::random(3, rng);
    const DofTransformReport d = dof_transform_check(map, ref);
    dofs = std::max({dofs, d.edge_moments / d.scale, d.mean_moments / d.scale, d.div_moments / d.scale});

    const PolyTensor tau_hat = PolyTensor::random(2, rng), sig_hat = PolyTensor::random(2, rng);
    const PolyVector v_hat = PolyVector::random(2, rng);
    const PolyTensor tau = transform_tensor(map, TensorPiola::contravariant, tau_hat);
    const PolyTensor sig = transform_tensor(map, TensorPiola::covariant, sig_hat);
    const PolyVector v = transform_vector(map, v_hat);
    double a = 0, b = 0, c = 0, e = 0, sa = 0, sc = 0, strain_defect = 0, strain_scale = 0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 x = g.point(rule.points[q]), xh = ghat.point(rule.points[q]);
      const double w = rule.weights[q] * g.area(), wh = rule.weights[q] * ghat.area();
      a += w * frobenius(tau(x), sig(x));
      b += wh * frobenius(tau_hat(xh), sig_hat(xh));
      sa += wh * std::abs(frobenius(tau_hat(xh), sig_hat(xh)));
      c += w * dot(tau.divergence(x), v(x));
      e += wh * dot(tau_hat.divergence(xh), v_hat(xh));
      sc += wh * std::abs(dot(tau_hat.divergence(xh), v_hat(xh)));
      const SymTensor2 mapped = map.J * congruence(map.B.inverse().transpose(), v_hat.strain(xh));
      strain_defect = std::max(strain_defect, frobenius_norm(mapped - v.strain(x)));
      strain_scale = std::max(strain_scale, frobenius_norm(mapped));
    }
    stress_strain = std::max(stress_strain, std::abs(a - b) / sa);
    div_disp = std::max(div_disp, std::abs(c - e) / sc);
    strain = std::max(strain, strain_defect / strain_scale);

    double p = 0, ph = 0, sp = 0;
    for (int i = 0; i < 3; ++i)
      for (std::size_t q = 0; q < er.size(); ++q) {
        const double s = er.points[q];
        const Vec2 x = g.edge_point(i, s), xh = ghat.edge_point(i, s);
        p += er.weights[q] * g.edge_length(i) * dot(tau(x) * g.normal(i), v(x));
        const double th = er.weights[q] * ghat.edge_length(i) * dot(tau_hat(xh) * ghat.normal(i), v_hat(xh));
        ph += th;
        sp += std::abs(th);
      }
    boundary = std::max(boundary, std::abs(p - ph) / sp);

    const LocalStress ihat = interpolate_local(ghat, ref.field());
    const LocalStress iphys = interpolate_local(g, transform_tensor(map, TensorPiola::contravariant, ref).field());
    const TensorField mapped = transform_tensor(map, TensorPiola::contravariant, ihat.field());
    double idef = 0, iscale = 0;
    for (const Barycentric& l : triangle_rule_7pt().points) {
      const Vec2 x = g.point(l);
      idef = std::max(idef, frobenius_norm(iphys(x) - mapped.value(x)));
      iscale = std::max(iscale, frobenius_norm(mapped.value(x)));
    }
    interp = std::max(interp, idef / iscale);
  }
  rep.checks.push_back(detail::upper_bound_check("dof-invariance", dofs, 1e-12,
                                                 "edge, mean and divergence moments, relative"));
  rep.checks.push_back(detail::upper_bound_check("pairing-stress-strain", stress_strain, 1e-12,
                                                 "(tau, sigma)_T, contravariant against covariant"));
  rep.checks.push_back(detail::upper_bound_check("pairing-div-displacement", div_disp, 1e-12,
                                                 "(div tau, v)_T with the rescaled Piola vector"));
  rep.checks.push_back(detail::upper_bound_check("pairing-boundary", boundary, 1e-12, "<tau n, v>_dT"));
  rep.checks.push_back(detail::upper_bound_check("strain-covariance", strain, 1e-12,
                                                 "eps(v) equals the covariant transform of eps(v_hat)"));
  rep.checks.push_back(detail::upper_bound_check("interpolation-commutes-with-transform", interp, 1e-12,
                                                 "I_T (P tau_hat) against P (I tau_hat)"));
  return rep;
}

// ---------------------------------------------------------------------------

/// The four side-tag assignments obtained by rotating (hc, sc, ss, sf) around the square.
inline std::vector<SideTags> rotated_mixed_tags() {
  const std::array<BoundaryTag, 4> base{BoundaryTag::hc, BoundaryTag::sc, BoundaryTag::ss, BoundaryTag::sf};
  std::vector<SideTags> r;
  for (int k = 0; k < 4; ++k) r.push_back({base[k % 4], base[(k + 1) % 4], base[(k + 2) % 4], base[(k + 3) % 4]});
  return r;
}

struct PatchErrors {
  FieldErrors errors;
  double trace{0.0};  ///< max nodal |eta_h - u|
};

/// Linear displacement reproduced on a uniform square mesh with n cells per side.
inline PatchErrors patch_errors(const SideTags& tags, int n, const Material& m = material_from_engineering(1.0, 0.3)) {
  const ManufacturedProblem p = linear_patch_problem(m, tags);
  const Triangulation mesh = p.coarse_mesh(n);
  const SaddleSystem sys = assemble(mesh, p);
  const DiscreteSolution sol = solve(sys);
  PatchErrors r;
  r.errors = compute_errors(mesh, sys.dofs, sol.x, p);
  for (int v = 0; v < sys.dofs.num_vertices; ++v) {
    const Vec2 u = p.u(mesh.x(v));
    r.trace = std::max(r.trace, norm(Vec2{sol.x(sys.dofs.trace_dof(v, 0)), sol.x(sys.dofs.trace_dof(v, 1))} - u));
  }
  return r;
}

inline std::string tags_label(const SideTags& t) {
  return to_string(t.bottom) + "/" + to_string(t.right) + "/" + to_string(t.top) + "/" + to_string(t.left);
}

/// Symmetry, patch exactness, insertion-order and thread-count independence.
inline VerifyReport verify_assembly(std::uint64_t seed) {
  VerifyReport rep{"assembly", seed, {}};
  std::mt19937_64 rng(seed);
  const Material m = material_from_engineering(1.0, 0.3);

  const auto tags = rotated_mixed_tags();
  const SideTags mixed = tags[rng() % tags.size()];
  const ManufacturedProblem smooth = smooth_square_problem(m, mixed);
  const Triangulation mesh = smooth.coarse_mesh(4);

  AssemblyOptions serial;
  serial.threads = 1;
  const SaddleSystem sys = assemble(mesh, smooth, serial);
  rep.checks.push_back(detail::upper_bound_check("symmetry", asymmetry(sys.K), 1e-14, "max|K - K^T| / max|K|"));

  {
    const int expected = sys.dofs.total() - sys.constraints.num_constrained_scalars();
    const bool ok = sys.reduced_size() == expected;
    rep.checks.push_back({"constraint-count", ok, static_cast<double>(sys.reduced_size()),
                          static_cast<double>(expected), "reduced size against total minus constrained scalars"});
  }

  const DiscreteSolution ref = solve(sys);
  {
    AssemblyOptions shuffled = serial;
    shuffled.element_order.resize(sys.dofs.num_triangles);
    std::iota(shuffled.element_order.begin(), shuffled.element_order.end(), 0);
    std::shuffle(shuffled.element_order.begin(), shuffled.element_order.end(), rng);
    const DiscreteSolution other = solve(assemble(mesh, smooth, shuffled));
    rep.checks.push_back(detail::upper_bound_check("element-order-independence",
                                                   (other.x - ref.x).norm() / ref.x.norm(), 1e-12,
                                                   "relative solution change under a random element order"));
  }
  {
    AssemblyOptions parallel;
    parallel.threads = 4;
    const SaddleSystem par = assemble(mesh, smooth, parallel);
    const double diff = SparseMatrix(par.K - sys.K).norm() + (par.b - sys.b).norm();
    rep.checks.push_back({"thread-count-independence", diff == 0.0, diff, 0.0,
                          "reduced system with 1 and 4 workers, bitwise"});
  }
  {
    // the exact stress interpolant satisfies the divergence equation up to load quadrature
    AssemblyOptions seven = serial;
    seven.load_rule = &triangle_rule_7pt();
    const ManufacturedProblem patch = linear_patch_problem(m, mixed);
    const SaddleSystem ps = assemble(mesh, patch, seven);
    const Eigen::VectorXd xi = interpolate_exact(mesh, ps.dofs, patch);
    const Eigen::VectorXd r = ps.K_full * xi - ps.b_full;
    const double res = r.segment(ps.dofs.displacement_offset(), ps.dofs.displacement_size()).norm();
    rep.checks.push_back(detail::upper_bound_check("divergence-rows-consistent", res, 1e-12,
                                                   "||B1 I sigma - load|| for the patch solution"));
  }
  {
    double worst = 0.0;
    std::string where;
    for (const SideTags& t : tags)
      for (int n : {1, 2, 4}) {
        const PatchErrors e = patch_errors(t, n, m);
        const double v = std::max({e.errors.sigma, e.errors.div, e.errors.u, e.errors.strain, e.trace});
        if (v >= worst) {
          worst = v;
          where = tags_label(t) + " n=" + std::to_string(n);
        }
      }
    rep.checks.push_back(detail::upper_bound_check("patch-exactness", worst, 1e-9, "largest error at " + where));
  }
  return rep;
}

inline VerifyReport verify_suite(const std::string& suite, std::uint64_t seed) {
  if (suite == "element") return verify_element(seed);
  if (suite == "transforms") return verify_transforms(seed);
  if (suite == "assembly") return verify_assembly(seed);
  throw std::invalid_argument("unknown suite '" + suite + "' (expected element, transforms or assembly)");
}

}  // namespace nnelast
