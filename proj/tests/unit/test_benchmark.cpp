#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace test;

TEST_CASE("experimental order of convergence") {
  const auto r = eoc({1.0, 0.25, 0.0625}, {1.0, 0.5, 0.25});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(eoc({3.0, 3.0}, {1.0, 0.5})[0] == doctest::Approx(0.0));
  CHECK(eoc({1.0, std::pow(0.5, 1.5)}, {0.2, 0.1})[0] == doctest::Approx(1.5));
  CHECK(eoc({1.0}, {1.0}).empty());
  CHECK_THROWS_AS(eoc({1.0, 0.0}, {1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(eoc({1.0, 0.5}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(eoc({1.0, 0.5}, {1.0}), InvalidArgument);
}

TEST_CASE("effectivity") {
  ErrorValues e;
  BoundTotals b;
  b.est_LinfL2 = 2.0;
  b.est_L2H1 = 4.0;
  CHECK(effectivity(e, b, NormKind::LinfL2) == 0.0);
  e.LinfL2 = 1.0;
  e.L2H1_nodal = 1.0;
  CHECK(effectivity(e, b, NormKind::LinfL2) == 0.5);
  CHECK(effectivity(e, b, NormKind::L2H1) == 0.25);
  b.est_L2H1 = 0.0;
  CHECK_THROWS(effectivity(e, b, NormKind::L2H1));
}

TEST_CASE("presets and schedule of runs") {
  const RunPreset p1 = preset("1");
  CHECK(p1.problem == ProblemKind::slow);
  CHECK(p1.degree == 1);
  CHECK(p1.k == 2);
  CHECK(p1.runs == 6);
  CHECK(preset("3").name == preset("3b").name);
  CHECK(preset("3a").degree == 1);
  CHECK(preset("3b").degree == 2);
  CHECK(preset("2").problem == ProblemKind::fast);
  CHECK_THROWS_AS(preset("9"), InvalidArgument);
  CHECK(preset_names().size() == 5);

  CHECK(run_meshsize(p1, 1) == 0.5);
  CHECK(run_meshsize(p1, 3) == 0.125);
  CHECK(run_timestep(p1, 1) == doctest::Approx(0.04));
  CHECK(run_timestep(p1, 2) == doctest::Approx(0.01));
  // tau(i) = 0.08 (1/2)^{3(i-1)}: 0.01 at i = 2, rounded to 1/100.
  const RunPreset p3 = preset("3b");
  CHECK(run_timestep(p3, 2) == doctest::Approx(0.01));
  CHECK(1.0 / run_timestep(p3, 1) == doctest::Approx(std::ceil(1.0 / 0.08)));
}

TEST_CASE("mesh schedule") {
  std::istringstream in("# refine the middle\n2 refine -0.5 -0.5 0.5 0.5 2\n\n3 base\n");
  const MeshSchedule s = parse_schedule(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].step == 2);
  CHECK_FALSE(s[0].reset);
  CHECK(s[0].times == 2);
  CHECK(s[0].hi.x == 0.5);
  CHECK(s[1].reset);

  std::istringstream bad("2 refine 0 0 1\n");
  CHECK_THROWS_AS(parse_schedule(bad), ParseError);
  std::istringstream verb("2 coarsen\n");
  CHECK_THROWS_AS(parse_schedule(verb), ParseError);

  const Triangulation base = build_macro_square(4);
  const Triangulation fine = apply_mesh_change(base, s[0]);
  CHECK(fine.element_count() > base.element_count());
  CHECK(refines(fine, base));
  CHECK(apply_mesh_change(base, s[1]) == base);
}

TEST_CASE("error norms") {
  std::mt19937_64 rng(11);
  const FeSpace s = build_space(square(2, 2), 2);
  const FeFunction g = random_function(s, rng);
  const SpaceTimeFunction u([g](const Point &x, double) { return evaluate(g, x); },
                            [g](const Point &x, double) { return evaluate_gradient(g, x); },
                            [](const Point &, double) { return 0.0; });
  const ErrorAccumulator acc(u, CoefficientMatrix::identity(), ErrorOptions{8, false});
  CHECK(acc.l2_error(g, 0.3) <= 1e-12);
}

namespace {

RunConfig small_config(bool fast = true, int exactness = 8) {
  RunConfig c;
  c.preset = preset("1");
  c.preset.runs = 2;
  c.fast_paths = fast;
  c.exactness = exactness;
  return c;
}

} // namespace

TEST_CASE("single run") {
  const RunResult r = run_single(small_config(), 1);
  CHECK(r.steps == 25);
  CHECK(r.h == 0.5);
  CHECK(r.rows.size() == 25);
  CHECK(r.rows.front().n == 1);
  CHECK(r.final_row().t == doctest::Approx(1.0));
  CHECK(r.max_pointwise_defect < 1e-10);
  CHECK(r.min_bound_ratio_32 > 1.0);
  CHECK(r.min_bound_ratio_33 > 1.0);
  CHECK(r.max_eff_LinfL2 <= 1.5);
  CHECK(r.min_eff_LinfL2 > 0.0);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].err.LinfL2 >= r.rows[i - 1].err.LinfL2);
    CHECK(r.rows[i].est.total_32 >= r.rows[i - 1].est.total_32);
  }
}

TEST_CASE("fast paths agree with the generic evaluation") {
  const RunResult a = run_single(small_config(true), 1);
  const RunResult b = run_single(small_config(false), 1);
  const RunRow &x = a.final_row();
  const RunRow &y = b.final_row();
  CHECK(x.err.LinfL2 == doctest::Approx(y.err.LinfL2).epsilon(1e-8));
  CHECK(x.err.L2H1 == doctest::Approx(y.err.L2H1).epsilon(1e-8));
  CHECK(x.err.H1L2 == doctest::Approx(y.err.H1L2).epsilon(1e-8));
  CHECK(x.est.total_32 == doctest::Approx(y.est.total_32).epsilon(1e-8));
  CHECK(x.est.high_total_H1L2 == doctest::Approx(y.est.high_total_H1L2).epsilon(1e-8));
}

TEST_CASE("quadrature refinement barely moves the errors") {
  const RunResult a = run_single(small_config(true, 8), 1);
  const RunResult b = run_single(small_config(true, 14), 1);
  CHECK(std::abs(a.final_row().err.LinfL2 / b.final_row().err.LinfL2 - 1.0) < 1e-3);
  CHECK(std::abs(a.final_row().err.L2H1 / b.final_row().err.L2H1 - 1.0) < 1e-3);
}

TEST_CASE("preset report and output") {
  RunConfig c = small_config();
  c.preset.runs = 1;
  const RunReport one = run_preset(c);
  for (const auto &[name, v] : one.eocs)
    CHECK(v.empty());

  c.preset.runs = 2;
  const RunReport r = run_preset(c, 2);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.eoc_of("err_LinfL2").size() == 1);
  CHECK(r.eoc_of("err_LinfL2")[0] > 0.5);
  CHECK(r.eoc_of("etaf1_acc_tau").size() == 1);

  std::ostringstream a, b;
  write_rows_csv(a, r);
  write_rows_csv(b, run_preset(c, 1));
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  std::string expected;
  for (const auto &col : csv_columns())
    expected += (expected.empty() ? "" : ",") + col;
  CHECK(header == expected);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);)
    ++lines;
  CHECK(lines == 25 + 100);

  std::ostringstream summary;
  write_summary_csv(summary, r);
  CHECK(summary.str().find("eoc_err_LinfL2") != std::string::npos);
  const std::string script = plot_script(r, "rows.csv", "summary.csv");
  CHECK(script.find("matplotlib") != std::string::npos);
  CHECK(script.find("rows.csv") != std::string::npos);
}

TEST_CASE("invalid configurations") {
  RunConfig c = small_config();
  c.preset.degree = 3;
  CHECK_THROWS_AS(run_preset(c), std::invalid_argument);
  c = small_config();
  c.preset.h1 = 0.3;
  CHECK_THROWS_AS(run_preset(c), InvalidArgument);
}
