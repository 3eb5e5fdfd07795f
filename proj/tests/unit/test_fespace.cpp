#include "support.hpp"

#include "parabest/errors.hpp"
#include "parabest/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace test;

namespace {

FeFunction from_coords(const FeSpace &s, double (*g)(Point)) {
  Eigen::VectorXd c(s.dof_count());
  for (int i = 0; i < s.dof_count(); ++i)
    c[i] = g(s.dof_coordinates()[static_cast<std::size_t>(i)]);
  return FeFunction(s, c);
}

} // namespace

TEST_CASE("dof counts") {
  const Triangulation t = square(2, 1);
  const FeSpace p1 = build_space(t, 1), p2 = build_space(t, 2);
  int boundary_vertices = 0;
  for (int v = 0; v < t.vertex_count(); ++v)
    boundary_vertices += t.vertex_on_boundary(v) ? 1 : 0;
  CHECK(p1.dof_count() == t.vertex_count());
  CHECK(p1.boundary_dof_count() == boundary_vertices);
  CHECK(p2.dof_count() == t.vertex_count() + t.edge_count());
  CHECK(p2.local_dof_count() == 6);
  CHECK_THROWS_AS(build_space(t, 3), UnsupportedDegree);
}

TEST_CASE("evaluation") {
  const Triangulation t = square(2, 1);
  const FeSpace p1 = build_space(t, 1);
  const int node = p1.free_dofs().front();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p1.dof_count());
  c[node] = 1.0;
  const FeFunction hat(p1, c);
  for (int i = 0; i < p1.dof_count(); ++i)
    CHECK(evaluate(hat, p1.dof_coordinates()[static_cast<std::size_t>(i)]) == doctest::Approx(i == node ? 1.0 : 0.0));

  const FeFunction x = from_coords(p1, [](Point p) { return p.x; });
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const Point p = random_point(rng);
    CHECK(evaluate(x, p) == doctest::Approx(p.x).epsilon(1e-12));
    const Vec2 g = evaluate_gradient(x, p);
    CHECK(g.x == doctest::Approx(1.0));
    CHECK(g.y == doctest::Approx(0.0).epsilon(1e-12));
  }

  const FeSpace p2 = build_space(unit_triangle(), 2);
  const FeFunction sq = from_coords(p2, [](Point p) { return p.x * p.x; });
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    CHECK(std::abs(evaluate(sq, {a, b}) - a * a) <= 1e-12);
  }
  CHECK_THROWS_AS(evaluate(sq, {2.0, 2.0}), OutsideDomain);
}

TEST_CASE("interpolation") {
  const FeSpace s = build_space(square(2, 1), 2);
  CHECK(interpolate(s, [](const Point &) { return 0.0; }).coefficients().norm() == 0.0);
  std::mt19937_64 rng(2);
  const FeFunction f = random_function(s, rng);
  const FeFunction g = interpolate(s, [&](const Point &x) { return evaluate(f, x); });
  CHECK((g.coefficients() - f.coefficients()).norm() <= 1e-12);
  const FeFunction u0 = interpolate(s, make_benchmark(ProblemKind::slow).data().initial);
  CHECK(u0.coefficients().norm() == 0.0);
}

TEST_CASE("transfer") {
  const Triangulation t = square(2, 1);
  const FeSpace coarse = build_space(t, 1), fine = build_space(uniform_refine(t, 1), 1);
  std::mt19937_64 rng(4);
  const FeFunction f = random_function(coarse, rng);
  CHECK((transfer(f, coarse).coefficients() - f.coefficients()).norm() == 0.0);
  const FeFunction g = transfer(f, fine);
  for (int k = 0; k < 50; ++k) {
    const Point x = random_point(rng);
    CHECK(std::abs(evaluate(g, x) - evaluate(f, x)) <= 1e-12);
  }
  CHECK(is_subspace(coarse, fine));
  CHECK_FALSE(is_subspace(fine, coarse));
  CHECK_THROWS_AS(transfer(g, coarse), NonNestedTransfer);
  CHECK(is_subspace(coarse, build_space(t, 2)));
}

TEST_CASE("quadrature") {
  const auto &one = quad_rule_triangle(1);
  double s = 0.0;
  for (double w : one.weights)
    s += w;
  CHECK(std::abs(s - 0.5) <= 1e-15);

  const auto &q4 = quad_rule_triangle(4);
  double m = 0.0;
  for (std::size_t i = 0; i < q4.size(); ++i) {
    const auto [x, y] = q4.points[i];
    m += q4.weights[i] * x * x * y * y;
  }
  CHECK(m == doctest::Approx(1.0 / 180.0).epsilon(1e-14));

  const auto &e3 = quad_rule_edge(3);
  double c = 0.0;
  for (std::size_t i = 0; i < e3.size(); ++i)
    c += e3.weights[i] * std::pow(e3.points[i][0], 3);
  CHECK(c == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS(quad_rule_triangle(kMaxTriangleExactness + 1));
}

TEST_CASE("function dump round trip") {
  std::mt19937_64 rng(6);
  const FeFunction f = random_function(build_space(square(2, 1), 2), rng);
  std::stringstream ss;
  write_function(ss, f);
  const FeFunction g = read_function(ss);
  CHECK(g.space() == f.space());
  CHECK((g.coefficients() - f.coefficients()).norm() == 0.0);
}
