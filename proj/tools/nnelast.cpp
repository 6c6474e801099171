// Command-line front end: convergence studies, property suites and field dumps.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nnelast/study.hpp"
#include "nnelast/verify.hpp"

namespace {

int run_study_command(const nnelast::StudyConfig& cfg) {
  const nnelast::StudyResult r = nnelast::run_study(cfg);
  std::cout << nnelast::study_csv(r);
  int failures = 0;
  for (const auto& l : r.levels)
    if (l.failure) {
      std::cerr << "level " << l.level << " failed: " << *l.failure << '\n';
      ++failures;
    }
  if (!cfg.out_dir.empty()) std::cerr << "wrote study.csv, study.json, study.svg to " << cfg.out_dir.string() << '\n';
  return failures == 0 ? 0 : 2;
}

int run_verify_command(const std::string& suite, std::uint64_t seed, bool tamper, const std::string& json_out) {
  nnelast::debug::tamper_basis = tamper;
  const nnelast::VerifyReport r = nnelast::verify_suite(suite, seed);
  nnelast::debug::tamper_basis = false;
  for (const auto& c : r.checks) {
    std::printf("%s %-40s %.3e (tol %.1e)  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.tolerance,
                c.detail.c_str());
  }
  if (!r.passed()) {
    std::string names;
    for (const auto& n : r.failed()) names += (names.empty() ? "" : ", ") + n;
    std::printf("suite %s (seed %llu) FAILED: %s\n", suite.c_str(), static_cast<unsigned long long>(seed),
                names.c_str());
  } else {
    std::printf("suite %s (seed %llu) passed\n", suite.c_str(), static_cast<unsigned long long>(seed));
  }
  if (!json_out.empty()) std::ofstream(json_out, std::ios::binary) << nnelast::to_json(r).dump(2) << '\n';
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite elements with normal-normal continuous stresses for planar elasticity"};
  app.require_subcommand(1);

  nnelast::StudyConfig study;
  std::string out_dir;
  auto* s = app.add_subcommand("study", "Convergence study over uniformly refined meshes");
  s->add_option("--problem", study.problem, "smooth or lshape")->check(CLI::IsMember({"smooth", "lshape"}));
  s->add_option("--nu", study.nu, "Poisson ratio in (0, 1/2)")->capture_default_str();
  s->add_option("--E", study.E, "Young's modulus")->capture_default_str();
  s->add_option("--levels", study.levels, "number of refinement levels")->capture_default_str();
  s->add_option("--n0", study.n0, "cells per unit length of the initial mesh")->capture_default_str();
  s->add_flag("--correct-stress", study.correct_stress, "add the constant correction in the pure Dirichlet case");
  s->add_option("--load-quad", study.load_quad, "load quadrature")->check(CLI::IsMember({"3pt", "7pt"}))
      ->capture_default_str();
  s->add_option("--error-quad", study.error_quad, "error quadrature")->check(CLI::IsMember({"7pt", "high"}))
      ->capture_default_str();
  s->add_option("--threads", study.threads, "worker threads (0: NN_ELAST_THREADS or hardware)");
  s->add_option("--out-dir", out_dir, "directory for study.csv, study.json and study.svg");

  std::string suite;
  std::uint64_t seed = 0;
  bool tamper = false;
  std::string verify_json;
  auto* v = app.add_subcommand("verify", "Randomized property suites");
  v->add_option("--suite", suite, "element, transforms or assembly")
      ->required()
      ->check(CLI::IsMember({"element", "transforms", "assembly"}));
  v->add_option("--seed", seed, "random seed")->capture_default_str();
  v->add_flag("--tamper", tamper, "perturb one basis function (negative control)");
  v->add_option("--json", verify_json, "write the report as JSON");

  nnelast::StudyConfig dump;
  dump.n0 = 1;
  int level = 2;
  std::string dump_out;
  auto* d = app.add_subcommand("dump", "Solve one level and write u_h, the recovered displacement and sigma_h as JSON");
  d->add_option("--problem", dump.problem, "smooth or lshape")->check(CLI::IsMember({"smooth", "lshape"}));
  d->add_option("--level", level, "refinement level")->capture_default_str();
  d->add_option("--out", dump_out, "output file")->required();
  d->add_option("--nu", dump.nu, "Poisson ratio")->capture_default_str();
  d->add_option("--n0", dump.n0, "cells per unit length of the initial mesh")->capture_default_str();
  d->add_flag("--correct-stress", dump.correct_stress, "add the constant correction in the pure Dirichlet case");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) {
      study.out_dir = out_dir;
      return run_study_command(study);
    }
    if (*v) return run_verify_command(suite, seed, tamper, verify_json);
    if (*d) {
      const nlohmann::json j = nnelast::dump_fields(dump, level);
      std::ofstream out(dump_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open " + dump_out);
      out << j.dump() << '\n';
      std::cerr << "wrote " << j["triangles"].size() << " triangles to " << dump_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
