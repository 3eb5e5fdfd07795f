#include "support.hpp"

#include "parabest/checks.hpp"
#include "parabest/overlay.hpp"
#include "parabest/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace test;

TEST_CASE("constants table") {
  ConstantsTable c;
  CHECK(c.get(6, 2) == 1.0);
  c.set(2, 2, 2.0);
  c.set(3, 2, 3.0);
  CHECK(c.get(6, 2) == 6.0);
  CHECK(c.get(12, 2) == 12.0);
  c.set(6, 2, 0.5);
  CHECK(c.get(6, 2) == 0.5);
  CHECK(c.get(6, 1) == 1.0);
}

TEST_CASE("weighted norms") {
  const Triangulation t = square(2, 1);
  ElementField r(t, 0);
  const auto h = meshsize(t);
  CHECK(weighted_norm(r, 2.0, h) == 0.0);
  for (int e = 0; e < t.element_count(); ++e)
    r.local(e)[0] = 3.0;
  const double hh = h[0];
  CHECK(weighted_norm(r, 1.5, h) == doctest::Approx(3.0 * std::pow(hh, 1.5) * 2.0).epsilon(1e-13));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double direct = 0.0;
  for (int e = 0; e < t.element_count(); ++e) {
    const double v = u(rng);
    r.local(e)[0] = v;
    direct += h[static_cast<std::size_t>(e)] * h[static_cast<std::size_t>(e)] * v * v * t.area(e);
  }
  CHECK(weighted_norm(r, 1.0, h) == doctest::Approx(std::sqrt(direct)).epsilon(1e-13));
}

TEST_CASE("jump residual") {
  const FeSpace s = build_space(square(2, 1), 1);
  // The plane x is continuous in gradient; only its boundary values are cut.
  Eigen::VectorXd c(s.dof_count());
  for (int i = 0; i < s.dof_count(); ++i)
    c[i] = s.dof_coordinates()[static_cast<std::size_t>(i)].x;
  const EdgeField j = jump_residual(FeFunction(s, c), CoefficientMatrix::identity());
  for (std::size_t i = 0; i < j.size(); ++i) {
    CHECK(std::abs(j[static_cast<int>(i)][0]) <= 1e-13);
    CHECK(std::abs(j[static_cast<int>(i)][1]) <= 1e-13);
  }

  // Hat function at the centre: the jump across an edge leaving the centre
  // is the difference of the two constant normal fluxes.
  const FeSpace p = build_space(square(2), 1);
  Eigen::VectorXd hc = Eigen::VectorXd::Zero(p.dof_count());
  hc[p.free_dofs()[0]] = 1.0;
  const FeFunction hat(p, hc);
  const EdgeField jh = jump_residual(hat, CoefficientMatrix::identity());
  const Triangulation &m = p.mesh();
  for (int i = 0; i < m.edge_count(); ++i) {
    const MeshEdge &me = m.edge(i);
    if (me.boundary)
      continue;
    const Vec2 nu = m.edge_normal(i);
    const Vec2 g0 = hat.gradient_in(me.elements[0], {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const Vec2 g1 = hat.gradient_in(me.elements[1], {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(jh[i][0] == doctest::Approx(dot(g0 - g1, nu)));
    CHECK(jh[i][1] == doctest::Approx(dot(g0 - g1, nu)));
  }
}

namespace {

struct Fixture {
  BenchmarkProblem problem = make_benchmark(ProblemKind::slow);
  BackwardEuler stepper{problem.data()};
  FeSpace space = build_space(square(4, 1), 1);
  std::vector<TimeSlabState> states;

  explicit Fixture(int steps = 4, double tau = 0.05) {
    states.push_back(stepper.initial_state(space));
    for (int n = 0; n < steps; ++n)
      states.push_back(stepper.step(states.back(), space, tau));
  }
};

} // namespace

TEST_CASE("elliptic reconstruction indicators") {
  const FeSpace s = build_space(square(2, 1), 1);
  const BackwardEuler zero(ProblemData{});
  const TimeSlabState s0 = zero.initial_state(s);
  const ConstantsTable c;
  CHECK(eta_rec_low(s0, RecKind::inf, c, 1.0) == 0.0);

  Fixture f;
  const TimeSlabState &st = f.states[2];
  const auto h = meshsize(st.space.mesh());
  const auto he = edge_meshsize(st.space.mesh());
  const double expected = weighted_norm(st.inner_residual, 2.0, h) + weighted_norm(st.jump_residual, 1.5, he);
  CHECK(eta_rec_low(st, RecKind::inf, c, 1.0) == doctest::Approx(expected).epsilon(1e-13));
  const double two = weighted_norm(st.inner_residual, 1.0, h) + weighted_norm(st.jump_residual, 0.5, he);
  CHECK(eta_rec_low(st, RecKind::two, c, 1.0) == doctest::Approx(two).epsilon(1e-13));
  CHECK(eta_rec_low(st, RecKind::two, c, 0.5) == doctest::Approx(2.0 * two).epsilon(1e-13));
}

TEST_CASE("space, time and data indicators") {
  Fixture f;
  const ConstantsTable c;
  const auto &s = f.states;
  const SpaceEstimate steady = eta_space_low(s[2], s[2], c, f.problem.a);
  CHECK(steady.total == 0.0);
  const SpaceEstimate moving = eta_space_low(s[1], s[2], c, f.problem.a);
  CHECK(moving.total > 0.0);
  CHECK(moving.changed == 0.0);
  CHECK(theta_low(s[2], s[2]) == 0.0);

  // U^0 = 0 and A^0 U^0 = 0, so theta_1 is half the norm of A^1 U^1.
  const Eigen::VectorXd &v = s[1].AnUn.coefficients();
  const double a1 = std::sqrt(v.dot(mass_matrix(s[1].space, DofSet::all) * v));
  CHECK(theta_low(s[0], s[1]) == doctest::Approx(0.5 * a1).epsilon(1e-12));

  // f in the discrete space and no mesh change: the projection defect vanishes.
  std::mt19937_64 rng(4);
  const FeFunction g = random_function(f.space, rng);
  const SpaceTimeFunction fin([g](const Point &x, double t) { return (1.0 + t) * evaluate(g, x); });
  ProblemData pd;
  pd.f = fin;
  const BackwardEuler own(pd);
  const TimeSlabState g1 = own.step(own.initial_state(f.space), f.space, 0.1);
  const TimeSlabState g2 = own.step(g1, f.space, 0.1);
  CHECK(gamma_low(g1, g2, fin, c, 1.0) <= 1e-12);
  CHECK(gamma_low(s[1], s[2], f.problem.f, c, 1.0) > 0.0);

  const SpaceTimeFunction steady_f([](const Point &x, double) { return x.x; });
  CHECK(eta_f(f.space, steady_f, 0.0, 0.1, 1) == 0.0);
  const ScalarFunction gx = [](const Point &x) { return std::sin(x.x) + x.y; };
  const SpaceTimeFunction linear([gx](const Point &x, double t) { return t * gx(x); });
  const double tau = 0.1;
  double gsq = 0.0;
  {
    const auto &m = f.space.mesh();
    const auto &q = quad_rule_triangle(10);
    for (int e = 0; e < m.element_count(); ++e) {
      const auto &v = m.element_vertices(e);
      for (std::size_t k = 0; k < q.size(); ++k) {
        const auto [a, b] = q.points[k];
        const Point x = m.vertex(v[0]) + a * (m.vertex(v[1]) - m.vertex(v[0])) + b * (m.vertex(v[2]) - m.vertex(v[0]));
        gsq += 2.0 * m.area(e) * q.weights[k] * gx(x) * gx(x);
      }
    }
  }
  CHECK(eta_f(f.space, linear, 0.3, 0.3 + tau, 1, 5, 10) == doctest::Approx(0.5 * tau * std::sqrt(gsq)).epsilon(1e-10));
}

TEST_CASE("fast paths agree with quadrature") {
  Fixture f(4, 0.05);
  const ConstantsTable c;
  const EstimatorSuite fast(f.stepper, c, EstimatorOptions{5, 8, true});
  const EstimatorSuite slow(f.stepper, c, EstimatorOptions{5, 8, false});
  const auto &s = f.states;
  for (int n = 2; n <= 4; ++n) {
    const auto a = fast.record(&s[static_cast<std::size_t>(n - 2)], s[static_cast<std::size_t>(n - 1)], s[static_cast<std::size_t>(n)]);
    const auto b = slow.record(&s[static_cast<std::size_t>(n - 2)], s[static_cast<std::size_t>(n - 1)], s[static_cast<std::size_t>(n)]);
    CHECK(a.lowSpace == doctest::Approx(b.lowSpace).epsilon(1e-10));
    CHECK(a.lowTheta == doctest::Approx(b.lowTheta).epsilon(1e-10));
    CHECK(a.lowGamma2 == doctest::Approx(b.lowGamma2).epsilon(1e-8));
    CHECK(a.highGamma1 == doctest::Approx(b.highGamma1).epsilon(1e-8));
    CHECK(a.lowEtaF == doctest::Approx(b.lowEtaF).epsilon(1e-8));
    CHECK(a.highEtaF2 == doctest::Approx(b.highEtaF2).epsilon(1e-8));
    CHECK(a.highTheta2 == doctest::Approx(2.0 / std::sqrt(3.0) * a.lowTheta));
  }
}

TEST_CASE("bound totals") {
  std::vector<EstimatorRecord> zeros(4);
  for (int n = 0; n < 4; ++n) {
    zeros[static_cast<std::size_t>(n)].n = n;
    zeros[static_cast<std::size_t>(n)].tau = n ? 0.1 : 0.0;
  }
  const BoundTotals z = totals(zeros, 3, 0.25, 0.5);
  CHECK(z.total_32 == 0.25);
  CHECK(z.total_33 == 0.25);
  CHECK(z.high_total_H1L2 == 0.5);

  EstimatorRecord r0, r1;
  r1.n = 1;
  r1.tau = 1.0;
  r1.lowTheta = 1.0;
  r1.lowEtaRecInf = 0.5;
  const BoundTotals one = totals({r0, r1}, 1, 0.25);
  CHECK(one.total_32 == doctest::Approx(0.25 + 0.5 + 4.0));

  Fixture f(6, 0.05);
  const EstimatorSuite suite(f.stepper, ConstantsTable{});
  std::vector<EstimatorRecord> recs{suite.initial(f.states[0])};
  for (std::size_t n = 1; n < f.states.size(); ++n)
    recs.push_back(suite.record(n >= 2 ? &f.states[n - 2] : nullptr, f.states[n - 1], f.states[n]));
  BoundAccumulator acc(0.1, 0.2);
  for (std::size_t m = 0; m < recs.size(); ++m) {
    acc.add(recs[m]);
    const BoundTotals naive = totals(recs, m, 0.1, 0.2);
    CHECK(acc.totals().total_32 == doctest::Approx(naive.total_32).epsilon(1e-14));
    CHECK(acc.totals().total_33 == doctest::Approx(naive.total_33).epsilon(1e-14));
    CHECK(acc.totals().high_total_H1L2 == doctest::Approx(naive.high_total_H1L2).epsilon(1e-14));
    CHECK(acc.totals().high_total_LinfH1 == doctest::Approx(naive.high_total_LinfH1).epsilon(1e-14));
    if (m >= 1)
      CHECK(acc.totals().eta_space_acc >= totals(recs, m - 1).eta_space_acc);
  }
}

TEST_CASE("changed edges after a mesh change") {
  const MeshChangeReport r = run_mesh_change_scenario();
  CHECK(r.changed_part > 0.0);
  CHECK(r.elements.size() == 4);
  CHECK(r.elements[2] > r.elements[1]);
  CHECK(r.elements[3] == r.elements[1]);
  CHECK(r.min_ratio_32 >= 1.0);
}
