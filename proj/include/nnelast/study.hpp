/**
 * @file study.hpp
 * @brief Convergence studies over uniformly refined meshes with CSV, JSON and SVG
 * output, and JSON dumps of discrete fields.
 *
 * CSV columns: level,N,h,ndof_total,err_sigma,err_div,err_u,err_strain,rel_total,
 * eoc_sigma,eoc_div,eoc_u,eoc_strain,eoc_total. The err_* columns are relative to
 * (||u||_1^2 + ||sigma||_div^2)^{1/2}; undefined values are written as NA.
 */
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnelast/analysis.hpp"
#include "nnelast/assembly.hpp"
#include "nnelast/problem.hpp"

namespace nnelast {

struct StudyConfig {
  std::string problem{"smooth"};  ///< smooth | lshape
  double nu{0.3};
  double E{1.0};
  int levels{6};
  int n0{2};
  bool correct_stress{false};
  std::string load_quad{"3pt"};   ///< 3pt | 7pt
  std::string error_quad{"7pt"};  ///< 7pt | high
  unsigned threads{0};
  std::filesystem::path out_dir;  ///< empty: no files

  void validate() const {
    if (problem != "smooth" && problem != "lshape")
      throw std::invalid_argument("unknown problem '" + problem + "' (expected smooth or lshape)");
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
    if (!(nu > 0.0 && nu < 0.5)) throw std::invalid_argument("nu must lie in (0, 1/2)");
    if (load_quad != "3pt" && load_quad != "7pt") throw std::invalid_argument("load quadrature must be 3pt or 7pt");
    if (error_quad != "7pt" && error_quad != "high") throw std::invalid_argument("error quadrature must be 7pt or high");
  }
};

inline ManufacturedProblem make_problem(const StudyConfig& c) {
  const Material m = material_from_engineering(c.E, c.nu);
  return c.problem == "lshape" ? lshape_singular_problem(m) : smooth_square_problem(m);
}

struct LevelResult {
  int level{0};
  std::size_t triangles{0};
  double h{0.0};
  int ndof_total{0};
  Eigen::Index ndof_reduced{0};
  FieldErrors abs;
  std::optional<std::string> failure;
  double asymmetry{0.0};
  std::string solver_backend;
  double solver_residual{0.0};
  int refinement_steps{0};
  double div_over_sigma{0.0};  ///< ||div_T sigma_h|| / ||sigma_h||
  std::optional<TraceIdentity> trace;
  CorrectionTensors corrections;
  double seconds_assembly{0.0}, seconds_solve{0.0}, seconds_errors{0.0};
};

struct StudyResult {
  StudyConfig config;
  std::optional<double> alpha;
  double normalizer{1.0};
  std::vector<LevelResult> levels;

  std::vector<double> column(int k) const;  ///< relative errors: 0 sigma, 1 div, 2 u, 3 strain, 4 total
  std::vector<double> h() const {
    std::vector<double> r;
    for (const auto& l : levels) r.push_back(l.h);
    return r;
  }
  std::vector<std::optional<double>> eoc_column(int k) const { return eoc(h(), column(k)); }
};

inline std::vector<double> StudyResult::column(int k) const {
  std::vector<double> r;
  for (const auto& l : levels) {
    if (l.failure) {
      r.push_back(std::nan(""));
      continue;
    }
    const double v[5] = {l.abs.sigma, l.abs.div, l.abs.u, l.abs.strain, l.abs.total()};
    r.push_back(v[k] / normalizer);
  }
  return r;
}

namespace detail {

inline std::string fmt(double v, const char* format = "%.10e") {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}
inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v, "%.6f") : "NA"; }

inline double norm_of_stress(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x, double& div_norm) {
  double s = 0.0, d = 0.0;
  const TriangleRule& rule = triangle_rule_7pt();
  for (int t = 0; t < dm.num_triangles; ++t) {
    const LocalStress ls = local_stress(mesh, dm, x, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 y = ls.geometry.point(rule.points[q]);
      const double w = rule.weights[q] * ls.geometry.area();
      const SymTensor2 v = ls(y);
      const Vec2 dv = ls.divergence(y);
      s += w * frobenius(v, v);
      d += w * dot(dv, dv);
    }
  }
  div_norm = std::sqrt(d);
  return std::sqrt(s);
}

}  // namespace detail

inline std::string study_csv(const StudyResult& r) {
  std::ostringstream out;
  out << "level,N,h,ndof_total,err_sigma,err_div,err_u,err_strain,rel_total,"
         "eoc_sigma,eoc_div,eoc_u,eoc_strain,eoc_total\n";
  std::array<std::vector<double>, 5> cols;
  std::array<std::vector<std::optional<double>>, 5> rates;
  for (int k = 0; k < 5; ++k) {
    cols[k] = r.column(k);
    rates[k] = r.eoc_column(k);
  }
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const LevelResult& l = r.levels[i];
    out << l.level << ',' << l.triangles << ',' << detail::fmt(l.h) << ',' << l.ndof_total;
    for (int k = 0; k < 5; ++k) out << ',' << detail::fmt(cols[k][i]);
    for (int k = 0; k < 5; ++k) out << ',' << detail::fmt(rates[k][i]);
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json study_json(const StudyResult& r) {
  nlohmann::json j;
  j["schema"] = "nnelast.study/1";
  const StudyConfig& c = r.config;
  j["config"] = {{"problem", c.problem}, {"nu", c.nu},         {"E", c.E},
                 {"levels", c.levels},   {"n0", c.n0},         {"correct_stress", c.correct_stress},
                 {"load_quad", c.load_quad}, {"error_quad", c.error_quad}, {"threads", thread_count(c.threads)}};
  j["alpha"] = r.alpha ? nlohmann::json(*r.alpha) : nlohmann::json(nullptr);
  j["normalizer"] = r.normalizer;
  auto& levels = j["levels"] = nlohmann::json::array();
  for (const LevelResult& l : r.levels) {
    nlohmann::json e;
    e["level"] = l.level;
    e["N"] = l.triangles;
    e["h"] = l.h;
    e["ndof_total"] = l.ndof_total;
    e["ndof_reduced"] = l.ndof_reduced;
    e["failure"] = l.failure ? nlohmann::json(*l.failure) : nlohmann::json(nullptr);
    e["errors_absolute"] = {{"sigma", l.abs.sigma}, {"div", l.abs.div}, {"u", l.abs.u}, {"strain", l.abs.strain}};
    e["solver"] = {{"backend", l.solver_backend},
                   {"residual", l.solver_residual},
                   {"refinement_steps", l.refinement_steps},
                   {"asymmetry", l.asymmetry}};
    e["div_over_sigma"] = l.div_over_sigma;
    if (l.trace) e["trace_identity"] = {{"lhs", l.trace->lhs}, {"rhs", l.trace->rhs}};
    e["correction"] = {{"active", l.corrections.active},
                       {"sigma0", l.corrections.sigma0.a11},
                       {"sigma0h", l.corrections.sigma0h.a11}};
    e["seconds"] = {{"assembly", l.seconds_assembly}, {"solve", l.seconds_solve}, {"errors", l.seconds_errors}};
    levels.push_back(std::move(e));
  }
  return j;
}

/// Log-log plot of the relative errors against N with dashed reference slopes.
inline std::string study_svg(const StudyResult& r) {
  const double W = 640, H = 480, L = 70, R = 170, T = 30, B = 50;
  struct Series {
    std::string name, color;
    std::vector<double> y;
  };
  std::vector<Series> series;
  const char* names[5] = {"||sigma-sigma_h||", "||div(sigma-sigma_h)||", "||u-u_h||", "|u-u~_h|_1", "total"};
  const char* colors[5] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#000000"};
  for (int k = 0; k < 5; ++k) {
    std::vector<double> y = r.column(k);
    // vanishing divergence errors are left out
    if (k == 1 && std::all_of(y.begin(), y.end(), [](double v) { return !(v > 1e-10); })) continue;
    series.push_back({names[k], colors[k], std::move(y)});
  }
  std::vector<double> N;
  for (const auto& l : r.levels) N.push_back(static_cast<double>(l.triangles));

  double ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (double v : s.y)
      if (v > 0 && std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  if (!(ymin < ymax)) {
    ymin = 1e-3;
    ymax = 1.0;
  }
  const double lx0 = std::floor(std::log10(N.front())), lx1 = std::ceil(std::log10(std::max(N.back(), N.front() * 10)));
  const double ly0 = std::floor(std::log10(ymin)), ly1 = std::ceil(std::log10(ymax));
  const auto px = [&](double n) { return L + (std::log10(n) - lx0) / (lx1 - lx0) * (W - L - R); };
  const auto py = [&](double v) { return H - B - (std::log10(v) - ly0) / (ly1 - ly0) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = lx0; e <= lx1; e += 1) {
    const double x = px(std::pow(10.0, e));
    s << "<line x1=\"" << x << "\" y1=\"" << T << "\" x2=\"" << x << "\" y2=\"" << H - B
      << "\" stroke=\"#ddd\"/><text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e" << e
      << "</text>\n";
  }
  for (double e = ly0; e <= ly1; e += 1) {
    const double y = py(std::pow(10.0, e));
    s << "<line x1=\"" << L << "\" y1=\"" << y << "\" x2=\"" << W - R << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/><text x=\"" << L - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e
      << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">N (triangles)</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << T - 10 << "\" text-anchor=\"middle\">relative errors, "
    << r.config.problem << ", nu=" << r.config.nu << "</text>\n";

  // reference slopes anchored at the first level of the total error
  std::vector<std::pair<std::string, double>> guides;
  if (r.alpha) {
    guides = {{"N^-a/2", *r.alpha / 2}, {"N^-a", *r.alpha}};
  } else {
    guides = {{"N^-1/2", 0.5}, {"N^-1", 1.0}};
  }
  const double anchor = series.empty() || !(series.back().y.front() > 0) ? std::pow(10.0, ly1) : series.back().y.front();
  for (std::size_t g = 0; g < guides.size(); ++g) {
    const double y0 = anchor * (g == 0 ? 2.0 : 0.5);
    const double y1 = y0 * std::pow(N.back() / N.front(), -guides[g].second);
    s << "<line x1=\"" << px(N.front()) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(N.back()) << "\" y2=\"" << py(y1)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>"
      << "<text x=\"" << px(N.back()) + 4 << "\" y=\"" << py(y1) << "\" fill=\"gray\">" << guides[g].first
      << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < N.size(); ++i)
      if (series[k].y[i] > 0 && std::isfinite(series[k].y[i])) pts << px(N[i]) << ',' << py(series[k].y[i]) << ' ';
    s << "<polyline fill=\"none\" stroke=\"" << series[k].color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
      << "\"/>\n";
    for (std::size_t i = 0; i < N.size(); ++i)
      if (series[k].y[i] > 0 && std::isfinite(series[k].y[i]))
        s << "<circle cx=\"" << px(N[i]) << "\" cy=\"" << py(series[k].y[i]) << "\" r=\"3\" fill=\""
          << series[k].color << "\"/>\n";
    const double ly = T + 20 + 18 * k;
    s << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << series[k].color << "\" stroke-width=\"2\"/><text x=\"" << W - R + 35 << "\" y=\""
      << ly + 4 << "\">" << series[k].name << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

/// Solves one level and fills everything except the relative quantities.
inline LevelResult run_level(const Triangulation& mesh, const ManufacturedProblem& p, const StudyConfig& c,
                             Eigen::VectorXd* solution = nullptr) {
  using clock = std::chrono::steady_clock;
  LevelResult lr;
  lr.level = mesh.level();
  lr.triangles = mesh.num_triangles();
  lr.h = mesh.h();
  AssemblyOptions opt;
  opt.load_rule = c.load_quad == "7pt" ? &triangle_rule_7pt() : &triangle_rule_3pt();
  opt.threads = c.threads;
  auto t0 = clock::now();
  const SaddleSystem sys = assemble(mesh, p, opt);
  lr.ndof_total = sys.dofs.total();
  lr.ndof_reduced = sys.reduced_size();
  lr.asymmetry = asymmetry(sys.K);
  auto t1 = clock::now();
  lr.seconds_assembly = std::chrono::duration<double>(t1 - t0).count();
  DiscreteSolution sol;
  try {
    sol = solve(sys);
  } catch (const SolverError& e) {
    lr.failure = e.what();
    lr.abs = {std::nan(""), std::nan(""), std::nan(""), std::nan("")};
    return lr;
  }
  auto t2 = clock::now();
  lr.seconds_solve = std::chrono::duration<double>(t2 - t1).count();
  lr.solver_backend = sol.solve.backend;
  lr.solver_residual = sol.solve.residual;
  lr.refinement_steps = sol.solve.refinement_steps;
  if (p.pure_dirichlet) lr.trace = trace_identity(mesh, sys.dofs, sol.x, p.material);
  lr.corrections = correction_tensors(mesh, p);
  const Eigen::VectorXd x = corrected_stress(mesh, sys.dofs, sol.x, lr.corrections, p.pure_dirichlet, c.correct_stress);
  const TriangleRule high = triangle_rule_collapsed(6);
  lr.abs = compute_errors(mesh, sys.dofs, x, p, c.error_quad == "high" ? high : triangle_rule_7pt(), c.threads);
  double dnorm = 0.0;
  const double snorm = detail::norm_of_stress(mesh, sys.dofs, x, dnorm);
  lr.div_over_sigma = snorm > 0 ? dnorm / snorm : 0.0;
  lr.seconds_errors = std::chrono::duration<double>(clock::now() - t2).count();
  if (solution) *solution = x;
  return lr;
}

/// Runs all levels; writes study.csv, study.json and study.svg when out_dir is set.
inline StudyResult run_study(const StudyConfig& c) {
  c.validate();
  const ManufacturedProblem p = make_problem(c);
  StudyResult r;
  r.config = c;
  r.alpha = p.alpha;
  Triangulation mesh = p.coarse_mesh(c.n0);
  for (int l = 0; l < c.levels; ++l) {
    if (l > 0) mesh = refine_uniform(mesh);
    r.levels.push_back(run_level(mesh, p, c));
  }
  r.normalizer = exact_solution_norm(mesh, p);
  if (!c.out_dir.empty()) {
    std::filesystem::create_directories(c.out_dir);
    std::ofstream(c.out_dir / "study.csv", std::ios::binary) << study_csv(r);
    std::ofstream(c.out_dir / "study.json", std::ios::binary) << study_json(r).dump(2) << '\n';
    std::ofstream(c.out_dir / "study.svg", std::ios::binary) << study_svg(r);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Field dumps. Schema "nnelast.fields/1":
//   vertices: [[x, y]], triangles: [[v0, v1, v2]],
//   u_h: per triangle the three vertex values [[u1, u2] x 3] (discontinuous),
//   u_tilde: per vertex [u1, u2] (continuous, from the trace unknowns),
//   sigma_h: per triangle samples at the vertices and the centroid, [[s11, s12, s22] x 4].

inline nlohmann::json fields_to_json(const Triangulation& mesh, const DofMap& dm, const Eigen::VectorXd& x) {
  nlohmann::json j;
  j["schema"] = "nnelast.fields/1";
  j["level"] = mesh.level();
  auto& vs = j["vertices"] = nlohmann::json::array();
  for (const Vertex& v : mesh.vertices()) vs.push_back({v.x.x, v.x.y});
  auto& ts = j["triangles"] = nlohmann::json::array();
  auto& uh = j["u_h"] = nlohmann::json::array();
  auto& sh = j["sigma_h"] = nlohmann::json::array();
  for (int t = 0; t < dm.num_triangles; ++t) {
    const Triangle& tri = mesh.triangle(t);
    ts.push_back({tri.v[0], tri.v[1], tri.v[2]});
    nlohmann::json u = nlohmann::json::array();
    for (int k = 0; k < 3; ++k) {
      Barycentric l{};
      l[k] = 1.0;
      const Vec2 v = displacement_value(dm, x, t, l);
      u.push_back({v.x, v.y});
    }
    uh.push_back(std::move(u));
    const LocalStress ls = local_stress(mesh, dm, x, t);
    nlohmann::json s = nlohmann::json::array();
    for (const Barycentric& l : {Barycentric{1, 0, 0}, Barycentric{0, 1, 0}, Barycentric{0, 0, 1},
                                 Barycentric{1.0 / 3, 1.0 / 3, 1.0 / 3}}) {
      const SymTensor2 v = ls(ls.geometry.point(l));
      s.push_back({v.a11, v.a12, v.a22});
    }
    sh.push_back(std::move(s));
  }
  auto& ut = j["u_tilde"] = nlohmann::json::array();
  for (const Vec2& v : recover_displacement(dm, x).nodal) ut.push_back({v.x, v.y});
  return j;
}

/// Solves the configured problem on refinement level `level` and dumps the fields.
inline nlohmann::json dump_fields(const StudyConfig& c, int level) {
  c.validate();
  if (level < 0) throw std::invalid_argument("level must be >= 0");
  const ManufacturedProblem p = make_problem(c);
  Triangulation mesh = p.coarse_mesh(c.n0);
  for (int l = 0; l < level; ++l) mesh = refine_uniform(mesh);
  Eigen::VectorXd x;
  const LevelResult lr = run_level(mesh, p, c, &x);
  if (lr.failure) throw std::runtime_error("dump_fields: " + *lr.failure);
  nlohmann::json j = fields_to_json(mesh, DofMap(mesh), x);
  j["problem"] = c.problem;
  j["nu"] = c.nu;
  return j;
}

}  // namespace nnelast
