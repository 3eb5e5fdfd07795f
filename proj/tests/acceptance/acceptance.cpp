// Runs the tabulated studies and the property suites and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any line fails.

#include "parabest/checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

using namespace parabest;

namespace {

struct Line {
  int id;
  bool pass;
  std::string text;
};

std::vector<Line> lines;
std::map<std::string, RunReport> reports;
std::map<std::string, double> seconds;

void report(int id, bool pass, const std::string &text) {
  lines.push_back({id, pass, text});
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char *f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const RunReport &study(const std::string &name) {
  if (auto it = reports.find(name); it != reports.end())
    return it->second;
  RunConfig c;
  c.preset = preset(name);
  const auto t0 = std::chrono::steady_clock::now();
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  RunReport r = run_preset(c, jobs);
  seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("# preset %s: %d runs in %.1f s\n", name.c_str(), c.preset.runs, seconds[name]);
  for (const auto &run : r.runs)
    std::printf("#   run h=%.5f tau=%.3e steps=%d dofs=%d  %.1f s  min bound/error %.2f %.2f\n", run.h, run.tau,
                run.steps, run.dofs, run.seconds, run.min_bound_ratio_32, run.min_bound_ratio_33);
  std::fflush(stdout);
  return reports.emplace(name, std::move(r)).first->second;
}

double last_eoc(const RunReport &r, const std::string &column) {
  const auto &v = r.eoc_of(column);
  return v.empty() ? std::nan("") : v.back();
}

bool in(double x, double lo, double hi) { return std::isfinite(x) && x >= lo && x <= hi; }

/// Checks every column against [lo, hi] and formats the measured EOCs.
bool band(const RunReport &r, const std::vector<std::string> &columns, double lo, double hi, std::string &text) {
  bool ok = true;
  for (const auto &c : columns) {
    const double e = last_eoc(r, c);
    ok = ok && in(e, lo, hi);
    text += c + "=" + fmt("%.3f", e) + " ";
  }
  text += "band [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "]";
  return ok;
}

void criterion_rates(int id, const std::string &name, double budget_min,
                     const std::vector<std::pair<std::vector<std::string>, std::pair<double, double>>> &groups) {
  const RunReport &r = study(name);
  bool ok = true;
  std::string text = "preset " + name + ": ";
  for (const auto &[cols, b] : groups) {
    ok = band(r, cols, b.first, b.second, text) && ok;
    text += "; ";
  }
  text += "time " + fmt("%.1f", seconds[name] / 60.0) + " min (target " + fmt("%.0f", budget_min) + ")";
  report(id, ok, text);
}

} // namespace

int main() {
  std::printf("# parabest acceptance suite\n");

  criterion_rates(1, "1", 30,
                  {{{"err_LinfL2", "eta_rec_inf_max"}, {1.8, 2.2}}, {{"err_L2H1", "eta_rec_2_acc"}, {0.85, 1.15}}});
  criterion_rates(2, "2", 10,
                  {{{"err_LinfL2", "err_L2H1", "est_LinfL2", "est_L2H1"}, {0.85, 1.15}}});
  criterion_rates(3, "3b", 30,
                  {{{"err_LinfL2", "eta_rec_inf_max"}, {2.7, 3.3}}, {{"err_L2H1", "eta_rec_2_acc"}, {1.8, 2.2}}});
  criterion_rates(4, "4", 20,
                  {{{"err_LinfL2", "est_LinfL2", "err_L2H1", "est_L2H1"}, {1.8, 2.2}}});

  {
    double lo = INFINITY, hi = 0.0;
    std::string per;
    for (const auto &name : preset_names()) {
      double plo = INFINITY, phi = 0.0;
      for (const auto &run : study(name).runs) {
        plo = std::min({plo, run.min_eff_LinfL2, run.min_eff_L2H1});
        phi = std::max({phi, run.max_eff_LinfL2, run.max_eff_L2H1});
      }
      per += name + ":[" + fmt("%.3f", plo) + "," + fmt("%.3f", phi) + "] ";
      lo = std::min(lo, plo);
      hi = std::max(hi, phi);
    }
    report(5, lo > 0.0 && hi <= 1.5,
           "effectivity over all runs and steps m>=2 in [" + fmt("%.3e", lo) + ", " + fmt("%.3e", hi) +
               "], required (0, 1.5]; by preset " + per);
  }

  {
    double defect = 0.0, agreement = 0.0;
    for (const auto &name : preset_names())
      for (const auto &run : study(name).runs) {
        defect = std::max(defect, run.max_pointwise_defect);
        agreement = std::max(agreement, run.max_elliptic_agreement);
      }
    report(6, defect <= 1e-10 && agreement <= 1e-8,
           "max relative defect " + fmt("%.2e", defect) + " (<= 1e-10), A^n U^n agreement " + fmt("%.2e", agreement) +
               " (<= 1e-8)");
  }

  {
    const CheckResult c = check_representation_identity();
    report(7, c.passed, "max relative defect " + fmt("%.2e", c.measured) + " (<= 1e-10) " + c.detail);
  }
  {
    const CheckResult c = check_mesh_algebra();
    report(8, c.passed, "violations " + fmt("%.0f", c.measured) + " " + c.detail);
  }

  {
    const RunReport &r = study("1");
    const double g = last_eoc(r, "gamma2_acc");
    const double f = last_eoc(r, "etaf1_acc_tau");
    report(9, in(g, 1.7, 2.3) && in(f, 0.85, 1.15),
           "preset 1: gamma2_acc EOC " + fmt("%.3f", g) + " band [1.70, 2.30]; etaf1_acc EOC in tau " + fmt("%.3f", f) +
               " band [0.85, 1.15]");
  }

  {
    const auto checks = check_mesh_change();
    bool ok = true;
    std::string text;
    for (const auto &c : checks) {
      ok = ok && c.passed;
      text += c.name + "=" + fmt("%.3e", c.measured) + " ";
    }
    report(10, ok, text + "(changed-edge part > 0, bound ratio >= 1)");
  }

  {
    const RunReport &r = study("1");
    const double a = last_eoc(r, "high_total_H1L2");
    const double b = last_eoc(r, "err_H1L2");
    report(11, std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= 0.3,
           "preset 1: high_total_H1L2 EOC " + fmt("%.3f", a) + ", err_H1L2 EOC " + fmt("%.3f", b) + ", difference " +
               fmt("%.3f", std::abs(a - b)) + " (<= 0.30)");
  }

  int failed = 0;
  for (const auto &l : lines)
    failed += l.pass ? 0 : 1;
  std::printf("# %d of %zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed == 0 ? 0 : 1;
}
