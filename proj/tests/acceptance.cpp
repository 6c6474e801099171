// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--out-dir <dir>] [--expect-fail <n>]...
//
// The exit status is zero when every failing criterion was named with
// --expect-fail; the FAIL lines are printed regardless.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nnelast/study.hpp"
#include "nnelast/verify.hpp"

namespace {

using namespace nnelast;

struct Outcome {
  int id;
  bool passed;
  std::string summary;
};

std::vector<Outcome> outcomes;

void report(int id, bool passed, const std::string& summary) {
  outcomes.push_back({id, passed, summary});
  std::printf("%s criterion %d: %s\n", passed ? "PASS" : "FAIL", id, summary.c_str());
  std::fflush(stdout);
}

std::string num(double v, const char* format = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string checks_summary(const VerifyReport& r, std::initializer_list<const char*> names, bool& ok) {
  std::string s;
  ok = true;
  for (const char* n : names) {
    const VerifyCheck* c = r.find(n);
    if (!c) {
      ok = false;
      s += std::string(s.empty() ? "" : "; ") + n + " missing";
      continue;
    }
    ok = ok && c->passed;
    s += std::string(s.empty() ? "" : "; ") + n + " " + num(c->value, "%.2e") + (c->passed ? " <= " : " > ") +
         num(c->tolerance, "%.0e");
  }
  return s;
}

/// The last two defined EOC values of column k.
std::vector<double> last_two(const StudyResult& r, int k) {
  std::vector<double> out;
  const auto rates = r.eoc_column(k);
  for (auto it = rates.rbegin(); it != rates.rend() && out.size() < 2; ++it)
    if (*it) out.push_back(**it);
  return out;
}

bool within(const std::vector<double>& v, double target, double tol) {
  if (v.size() < 2) return false;
  for (double x : v)
    if (!(std::abs(x - target) <= tol)) return false;
  return true;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (auto it = v.rbegin(); it != v.rend(); ++it) s += (s.empty() ? "" : ", ") + num(*it, "%.3f");
  return "(" + s + ")";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out_dir = (std::filesystem::temp_directory_path() / "nnelast_acceptance").string();
  std::vector<int> expected_failures;
  app.add_option("--out-dir", out_dir, "where the study artifacts are written");
  app.add_option("--expect-fail", expected_failures, "criteria known not to hold");
  CLI11_PARSE(app, argc, argv);
  const std::filesystem::path root(out_dir);

  // 1-3: element and transform properties
  {
    const auto t0 = std::chrono::steady_clock::now();
    const VerifyReport el = verify_element(0);
    const double secs = seconds_since(t0);
    bool ok = false;
    const std::string s = checks_summary(el, {"unisolvency"}, ok);
    report(1, ok && secs < 5.0, s + " (ratio is a lower bound); element suite " + num(secs, "%.2f") + " s < 5 s");
    const std::string i = checks_summary(
        el, {"interpolation-projection", "interpolation-commutes-with-div", "boundary-moment-conservation"}, ok);
    report(2, ok, i);
    const VerifyReport tr = verify_transforms(0);
    report(3, tr.passed(),
           checks_summary(tr,
                          {"dof-invariance", "pairing-stress-strain", "pairing-div-displacement", "pairing-boundary",
                           "strain-covariance", "interpolation-commutes-with-transform"},
                          ok) +
               " over 100 maps");
  }

  // 4: patch test
  {
    double worst = 0.0;
    std::string where;
    for (const SideTags& tags : rotated_mixed_tags())
      for (int n : {1, 2, 4, 8, 16}) {
        const PatchErrors e = patch_errors(tags, n);
        const double v = std::max({e.errors.sigma, e.errors.div, e.errors.u, e.errors.strain, e.trace});
        if (v >= worst) {
          worst = v;
          where = tags_label(tags) + ", n=" + std::to_string(n);
        }
      }
    report(4, worst <= 1e-9,
           "max error " + num(worst, "%.2e") + " <= 1e-9 over 4 rotated tag sets x 5 levels (worst at " + where + ")");
  }

  // 5-6: smooth problem
  StudyConfig smooth;
  smooth.problem = "smooth";
  smooth.levels = 6;
  smooth.n0 = 2;
  smooth.nu = 0.3;
  smooth.out_dir = root / "smooth_nu0.3";
  auto t0 = std::chrono::steady_clock::now();
  const StudyResult s3 = run_study(smooth);
  const double s3_secs = seconds_since(t0);
  {
    const auto tot = last_two(s3, 4), u = last_two(s3, 2), dv = last_two(s3, 1);
    const std::size_t n_final = s3.levels.back().triangles;
    const bool ok = n_final >= 8192 && within(tot, 1.0, 0.15) && within(u, 2.0, 0.2) && within(dv, 2.0, 0.2) &&
                    s3_secs < 300.0;
    report(5, ok,
           "N_final " + std::to_string(n_final) + "; EOC total " + list(tot) + " vs 1.0+-0.15, u " + list(u) +
               " vs 2.0+-0.2, div " + list(dv) + " vs 2.0+-0.2; " + num(s3_secs, "%.1f") + " s");
  }

  StudyConfig incompressible = smooth;
  incompressible.nu = 0.4999999;
  incompressible.out_dir = root / "smooth_nu0.4999999";
  const StudyResult s5 = run_study(incompressible);
  {
    bool ok = true;
    std::string detail;
    const char* names[] = {"total", "u", "div"};
    const int cols[] = {4, 2, 1};
    for (int k = 0; k < 3; ++k) {
      const auto a = last_two(s3, cols[k]), b = last_two(s5, cols[k]);
      bool same = a.size() == b.size() && a.size() == 2;
      for (std::size_t i = 0; same && i < a.size(); ++i) same = std::abs(a[i] - b[i]) <= 0.2;
      ok = ok && same;
      detail += std::string(names[k]) + " " + list(b) + (same ? " ~ " : " != ") + list(a) + "; ";
    }
    const auto r3 = s3.column(4), r5 = s5.column(4);
    double worst = 1.0;
    for (std::size_t i = 0; i < r3.size(); ++i) worst = std::max({worst, r3[i] / r5[i], r5[i] / r3[i]});
    ok = ok && worst <= 3.0;
    detail += "max level ratio of rel_total " + num(worst, "%.3g") + " vs 3";
    report(6, ok, "EOC at nu=0.4999999 vs nu=0.3: " + detail);
  }

  // 7-8: L-shape
  StudyConfig lshape;
  lshape.problem = "lshape";
  lshape.levels = 6;
  lshape.n0 = 2;
  lshape.nu = 0.3;
  lshape.out_dir = root / "lshape_nu0.3";
  const StudyResult sl = run_study(lshape);
  {
    const double alpha = sl.alpha.value_or(std::nan(""));
    const auto tot = sl.eoc_column(4).back(), u = sl.eoc_column(2).back();
    double div_worst = 0.0;
    for (const auto& l : sl.levels) div_worst = std::max(div_worst, l.failure ? INFINITY : l.div_over_sigma);
    const bool ok = std::abs(alpha - 0.59516) < 5e-5 && tot && std::abs(*tot - alpha) <= 0.1 && u &&
                    std::abs(*u - 2 * alpha) <= 0.2 && div_worst <= 1e-10;
    report(7, ok,
           "alpha " + num(alpha, "%.6f") + " (|alpha-0.59516| " + num(std::abs(alpha - 0.59516), "%.1e") +
               "); final EOC total " + (tot ? num(*tot, "%.3f") : "NA") + " vs alpha+-0.1, u " +
               (u ? num(*u, "%.3f") : "NA") + " vs " + num(2 * alpha, "%.3f") + "+-0.2; max ||div sigma_h||/||sigma_h|| " +
               num(div_worst, "%.1e"));

    double worst = 0.0;
    bool all = true;
    for (const auto& l : sl.levels) {
      if (!l.trace) {
        all = false;
        continue;
      }
      worst = std::max(worst, l.trace->relative_defect());
    }
    report(8, all && worst <= 1e-9,
           "max relative defect " + num(worst, "%.2e") + " <= 1e-9 over " + std::to_string(sl.levels.size()) +
               " levels (scale: sum of |edge flux terms|)");
  }

  // 9: solver contract on every level of every study
  {
    int levels = 0, failed = 0;
    double worst = 0.0;
    for (const StudyResult* r : {&s3, &s5, &sl})
      for (const auto& l : r->levels) {
        ++levels;
        if (l.failure) {
          ++failed;
          continue;
        }
        worst = std::max(worst, l.solver_residual);
      }
    report(9, failed == 0 && worst <= 1e-10,
           std::to_string(levels - failed) + "/" + std::to_string(levels) + " levels solved, max residual " +
               num(worst, "%.2e") + " <= 1e-10");
  }

  // 10: determinism
  {
    StudyConfig again = smooth;
    again.out_dir = root / "smooth_nu0.3_rerun";
    again.threads = 2;
    run_study(again);
    const std::string a = read_file(smooth.out_dir / "study.csv"), b = read_file(again.out_dir / "study.csv");
    report(10, !a.empty() && a == b,
           "study.csv of two identical smooth runs " + std::string(a == b ? "byte-identical" : "differ") + " (" +
               std::to_string(a.size()) + " bytes)");
  }

  const std::set<int> expected(expected_failures.begin(), expected_failures.end());
  int passed = 0, unexpected = 0;
  for (const auto& o : outcomes) {
    if (o.passed)
      ++passed;
    else if (!expected.count(o.id))
      ++unexpected;
  }
  std::string tally = std::to_string(passed) + "/" + std::to_string(outcomes.size()) + " criteria passed";
  if (!expected.empty()) {
    std::string e;
    for (int id : expected) e += (e.empty() ? "" : ", ") + std::to_string(id);
    tally += "; expected failures: " + e;
  }
  std::printf("%s\n", tally.c_str());

  std::ofstream log(root / "acceptance.txt", std::ios::binary);
  for (const auto& o : outcomes)
    log << (o.passed ? "PASS" : "FAIL") << " criterion " << o.id << ": " << o.summary << '\n';
  log << tally << '\n';
  return unexpected == 0 ? 0 : 1;
}
