#include "support.hpp"

#include "parabest/errors.hpp"
#include "parabest/overlay.hpp"
#include "parabest/quadrature.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace test;

TEST_CASE("mass matrix of one triangle") {
  const FeSpace s = build_space(unit_triangle(), 1);
  const Eigen::MatrixXd m = Eigen::MatrixXd(mass_matrix(s, DofSet::all));
  Eigen::MatrixXd expected(3, 3);
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected *= 0.5 / 12.0;
  CHECK((m - expected).norm() <= 1e-15);
}

TEST_CASE("mass matrix properties") {
  for (int degree : {1, 2}) {
    const FeSpace s = build_space(square(2, 1), degree);
    const SparseMatrix m = mass_matrix(s, DofSet::all);
    CHECK(Eigen::VectorXd(m * Eigen::VectorXd::Ones(m.cols())).sum() == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(symmetry_defect(m) <= 1e-14);
    std::mt19937_64 rng(1);
    const SparseMatrix mf = mass_matrix(s);
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd x = random_function(s, rng).free_part();
      CHECK(x.dot(mf * x) > 0.0);
    }
  }
}

TEST_CASE("stiffness matrix against quadrature") {
  std::mt19937_64 rng(2);
  for (int degree : {1, 2}) {
    const FeSpace s = build_space(square(2, 1), degree);
    const SparseMatrix k = stiffness_matrix(s, CoefficientMatrix::identity(), DofSet::all);
    CHECK(symmetry_defect(k) <= 1e-14 * k.norm());
    const auto &q = quad_rule_triangle(4);
    const Triangulation &m = s.mesh();
    for (int trial = 0; trial < 10; ++trial) {
      const FeFunction v = random_function(s, rng);
      double grad = 0.0;
      for (int e = 0; e < m.element_count(); ++e)
        for (std::size_t i = 0; i < q.size(); ++i) {
          const Vec2 g = v.gradient_in(e, {1.0 - q.points[i][0] - q.points[i][1], q.points[i][0], q.points[i][1]});
          grad += 2.0 * m.area(e) * q.weights[i] * dot(g, g);
        }
      CHECK(v.coefficients().dot(k * v.coefficients()) == doctest::Approx(grad).epsilon(1e-12));
    }
  }
}

TEST_CASE("anisotropic coefficient bounds") {
  const CoefficientMatrix a(2.0, 0.5, 1.0);
  CHECK(a.alpha() <= a.beta());
  CHECK(a.alpha() > 0.0);
  const FeSpace s = build_space(square(2, 1), 1);
  const SparseMatrix ka = stiffness_matrix(s, a), ki = stiffness_matrix(s, CoefficientMatrix::identity());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd v = random_function(s, rng).free_part();
    const double energy = v.dot(ka * v), grad = v.dot(ki * v);
    CHECK(energy >= a.alpha() * grad * (1 - 1e-12));
    CHECK(energy <= a.beta() * grad * (1 + 1e-12));
  }
}

TEST_CASE("load vector") {
  const FeSpace s = build_space(square(2, 1), 2);
  const SparseMatrix m = mass_matrix(s);
  CHECK(load_vector(s, [](const Point &) { return 0.0; }).norm() == 0.0);
  const Eigen::VectorXd ones = load_vector(s, [](const Point &) { return 1.0; }, DofSet::all);
  const SparseMatrix mall = mass_matrix(s, DofSet::all);
  CHECK((ones - mall * Eigen::VectorXd::Ones(mall.cols())).norm() <= 1e-13);
  std::mt19937_64 rng(4);
  const FeFunction f = random_function(s, rng);
  const Eigen::VectorXd b = load_vector(s, [&](const Point &x) { return evaluate(f, x); });
  CHECK((b - m * f.free_part()).norm() <= 1e-12);
}

TEST_CASE("sparse SPD solve") {
  const FeSpace s = build_space(square(2, 1), 1);
  const SparseMatrix m = mass_matrix(s);
  CHECK(solve_spd(m, Eigen::VectorXd::Zero(m.rows())).norm() == 0.0);
  std::mt19937_64 rng(5);
  const Eigen::VectorXd y = random_function(s, rng).free_part();
  CHECK((solve_spd(m, m * y) - y).norm() <= 1e-10 * y.norm());

  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd b(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j)
      b(i, j) = n(rng);
  const Eigen::MatrixXd dense = b * b.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
  Eigen::VectorXd rhs(50);
  for (int i = 0; i < 50; ++i)
    rhs[i] = n(rng);
  const SparseMatrix sp = dense.sparseView();
  CHECK((solve_spd(sp, rhs) - dense.llt().solve(rhs)).norm() <= 1e-8);

  SparseMatrix bad(2, 2);
  bad.insert(0, 0) = -1.0;
  bad.insert(1, 1) = 1.0;
  CHECK_THROWS_AS(SpdSolver{bad}, SolverFailure);
}

TEST_CASE("cross-mesh integrals") {
  std::mt19937_64 rng(6);
  const Triangulation t = square(2, 1);
  const Triangulation a = random_refinement(t, rng), b = random_refinement(t, rng);
  const FeSpace sa = build_space(a, 2), sb = build_space(b, 1);
  const FeFunction v = random_function(sb, rng);
  // Test functions of sa against v equal those against its exact transfer to
  // the common refinement.
  const FeSpace sc = build_space(coarsest_common_refinement(a, b), 2);
  const FeFunction vc = transfer(v, sc);
  const FeFunction w = random_function(sa, rng);
  const FeFunction wc = transfer(w, sc);
  const double lhs = w.free_part().dot(mixed_mass(sa, v));
  const double rhs = wc.free_part().dot(mass_matrix(sc) * vc.free_part());
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  const double ls = w.free_part().dot(mixed_stiffness(sa, v, CoefficientMatrix::identity()));
  const double rs = wc.free_part().dot(stiffness_matrix(sc, CoefficientMatrix::identity()) * vc.free_part());
  CHECK(ls == doctest::Approx(rs).epsilon(1e-12));
  const double norm = l2_norm_of_combination({{1.0, &v}, {-1.0, &vc}});
  CHECK(norm <= 1e-12);
}
