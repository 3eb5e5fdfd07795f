#include "support.hpp"

#include "parabest/errors.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <sstream>

using namespace test;

namespace {

ProblemData smooth_data() {
  ProblemData d;
  d.f = SpaceTimeFunction([](const Point &x, double t) { return (1.0 + t) * std::cos(x.x) * (1.0 - x.y * x.y); });
  d.initial = [](const Point &x) { return (1.0 - x.x * x.x) * (1.0 - x.y * x.y); };
  return d;
}

} // namespace

TEST_CASE("l2 projection") {
  const FeSpace s = build_space(square(2), 1);
  REQUIRE(s.free_dofs().size() == 1);
  const FeFunction one = l2_project(s, [](const Point &) { return 1.0; });
  CHECK(one.coefficients()[s.free_dofs()[0]] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(l2_project(s, [](const Point &) { return 0.0; }).coefficients().norm() == 0.0);

  std::mt19937_64 rng(1);
  const FeSpace p2 = build_space(square(2, 1), 2);
  const FeFunction f = random_function(p2, rng);
  const FeSpace fine = build_space(uniform_refine(p2.mesh(), 1), 2);
  const FeFunction g = l2_project(fine, f);
  CHECK((l2_project(p2, g).coefficients() - f.coefficients()).norm() <= 1e-10);
}

TEST_CASE("discrete elliptic operator") {
  const FeSpace s = build_space(square(2, 1), 2);
  const CoefficientMatrix a(1.5, 0.3, 0.8);
  CHECK(discrete_elliptic(s, FeFunction(s), a).coefficients().norm() == 0.0);
  std::mt19937_64 rng(2);
  const SparseMatrix m = mass_matrix(s), k = stiffness_matrix(s, a);
  for (int trial = 0; trial < 10; ++trial) {
    const FeFunction v = random_function(s, rng), w = random_function(s, rng);
    const FeFunction av = discrete_elliptic(s, v, a);
    const double lhs = w.free_part().dot(m * av.free_part());
    const double rhs = w.free_part().dot(k * v.free_part());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("initial state") {
  const FeSpace s = build_space(square(2, 1), 1);
  const BackwardEuler zero(ProblemData{});
  const TimeSlabState s0 = zero.initial_state(s);
  CHECK(s0.U.coefficients().norm() == 0.0);
  for (double r : s0.inner_residual.values())
    CHECK(r == 0.0);
  for (std::size_t i = 0; i < s0.jump_residual.size(); ++i)
    CHECK(s0.jump_residual[static_cast<int>(i)][0] == 0.0);

  const BackwardEuler be(smooth_data());
  const TimeSlabState t0 = be.initial_state(s);
  // P1 has no second derivatives, so R = -A U.
  std::array<double, lagrange::kMaxLocalDofs> c{};
  for (int e = 0; e < s.mesh().element_count(); ++e) {
    t0.AnUn.local(e, c);
    const auto r = t0.inner_residual.local(e);
    for (int i = 0; i < 3; ++i)
      CHECK(r[static_cast<std::size_t>(i)] == doctest::Approx(-c[static_cast<std::size_t>(i)]));
  }
}

TEST_CASE("steps") {
  const FeSpace s = build_space(square(2, 1), 1);
  const BackwardEuler zero(ProblemData{});
  TimeSlabState st = zero.initial_state(s);
  for (int n = 0; n < 3; ++n) {
    st = zero.step(st, s, 0.1);
    CHECK(st.U.coefficients().norm() == 0.0);
  }

  const ProblemData data = smooth_data();
  const BackwardEuler be(data);
  const TimeSlabState s0 = be.initial_state(s);
  const double tau = 0.05;
  const TimeSlabState s1 = be.step(s0, s, tau);
  const Eigen::MatrixXd m = Eigen::MatrixXd(mass_matrix(s));
  const Eigen::MatrixXd k = Eigen::MatrixXd(stiffness_matrix(s, data.a));
  const Eigen::VectorXd b = load_vector(s, data.f.at(tau));
  const Eigen::VectorXd dense = (m + tau * k).llt().solve(tau * b + m * s0.U.free_part());
  CHECK((s1.U.free_part() - dense).norm() <= 1e-10 * dense.norm());
  CHECK(s1.pointwise_defect <= 1e-10);
  CHECK(s1.elliptic_agreement <= 1e-8);
  CHECK(s1.t == doctest::Approx(tau));

  // Mesh change: the pointwise form still holds with the projected U^{n-1}.
  const FeSpace fine = build_space(uniform_refine(s.mesh(), 1), 2);
  const TimeSlabState s2 = be.step(s1, fine, tau);
  CHECK(s2.pointwise_defect <= 1e-10);
  const TimeSlabState s3 = be.step(s2, s, tau);
  CHECK(s3.pointwise_defect <= 1e-10);
  CHECK_THROWS_AS(be.step(s3, s, 0.0), InvalidArgument);
  CHECK_THROWS_AS(be.step(s3, build_space(square(2, 1), 1), tau), IncompatibleMeshes);
}

TEST_CASE("checkpoint round trip") {
  const BackwardEuler be(smooth_data());
  const FeSpace s = build_space(square(2, 1), 2);
  const TimeSlabState s1 = be.step(be.initial_state(s), s, 0.1);
  std::stringstream ss;
  write_state(ss, s1);
  const TimeSlabState back = read_state(ss, CoefficientMatrix::identity());
  CHECK(back.n == 1);
  CHECK(back.t == s1.t);
  CHECK((back.U.coefficients() - s1.U.coefficients()).norm() == 0.0);
  CHECK((back.AnUn.coefficients() - s1.AnUn.coefficients()).norm() == 0.0);
  CHECK(back.inner_residual.values() == s1.inner_residual.values());
  std::stringstream junk("not a checkpoint");
  CHECK_THROWS_AS(read_state(junk, CoefficientMatrix::identity()), ParseError);
}
