#include "parabest/assembly.hpp"

#include "parabest/errors.hpp"
#include "parabest/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <mutex>

namespace parabest {

CoefficientMatrix::CoefficientMatrix(double a11, double a12, double a22) : a11_(a11), a12_(a12), a22_(a22) {
  Eigen::Matrix2d m;
  m << a11, a12, a12, a22;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
  alpha_ = eig.eigenvalues()(0);
  beta_ = eig.eigenvalues()(1);
  if (!(alpha_ > 0.0))
    throw InvalidArgument("diffusion matrix is not positive definite");
}

CoefficientMatrix::CoefficientMatrix(double a11, double a12, double a22, double alpha, double beta)
    : CoefficientMatrix(a11, a12, a22) {
  if (!(alpha > 0.0) || alpha > alpha_ * (1.0 + 1e-12) || beta < beta_ * (1.0 - 1e-12))
    throw InvalidArgument("ellipticity/continuity bounds are inconsistent with the matrix");
  alpha_ = alpha;
  beta_ = beta;
}

const Eigen::MatrixXd &reference_mass(int degree) {
  static std::once_flag once;
  static Eigen::MatrixXd m[3];
  std::call_once(once, [] {
    m[0] = Eigen::MatrixXd::Ones(1, 1);
    const auto &q = quad_rule_triangle(4);
    for (int d = 1; d <= 2; ++d) {
      const int n = lagrange::local_dofs(d);
      m[d] = Eigen::MatrixXd::Zero(n, n);
      std::array<double, lagrange::kMaxLocalDofs> phi{};
      for (std::size_t k = 0; k < q.size(); ++k) {
        const auto [s, t] = q.points[k];
        lagrange::values(d, {1.0 - s - t, s, t}, phi);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            m[d](i, j) += 2.0 * q.weights[k] * phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
      }
    }
  });
  if (degree < 0 || degree > 2)
    throw UnsupportedDegree("no reference mass matrix for degree " + std::to_string(degree));
  return m[degree];
}

namespace {

SparseMatrix assemble(const FeSpace &space, DofSet dofs,
                      const std::function<void(int e, Eigen::Matrix<double, 6, 6> &local)> &element) {
  const int nloc = space.local_dof_count();
  const bool free_only = dofs == DofSet::free;
  const int n = free_only ? static_cast<int>(space.free_dofs().size()) : space.dof_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(space.mesh().element_count() * nloc * nloc));
  Eigen::Matrix<double, 6, 6> local;
  for (int e = 0; e < space.mesh().element_count(); ++e) {
    local.setZero();
    element(e, local);
    const auto d = space.element_dofs(e);
    for (int i = 0; i < nloc; ++i) {
      const int gi = free_only ? space.free_index(d[static_cast<std::size_t>(i)]) : d[static_cast<std::size_t>(i)];
      if (gi < 0)
        continue;
      for (int j = 0; j < nloc; ++j) {
        const int gj = free_only ? space.free_index(d[static_cast<std::size_t>(j)]) : d[static_cast<std::size_t>(j)];
        if (gj >= 0)
          triplets.emplace_back(gi, gj, local(i, j));
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

} // namespace

SparseMatrix mass_matrix(const FeSpace &space, DofSet dofs) {
  const Eigen::MatrixXd &ref = reference_mass(space.degree());
  const int nloc = space.local_dof_count();
  return assemble(space, dofs, [&](int e, Eigen::Matrix<double, 6, 6> &local) {
    local.topLeftCorner(nloc, nloc) = space.mesh().area(e) * ref;
  });
}

SparseMatrix stiffness_matrix(const FeSpace &space, const CoefficientMatrix &a, DofSet dofs) {
  const int degree = space.degree();
  const int nloc = space.local_dof_count();
  const auto &q = quad_rule_triangle(2 * (degree - 1));
  return assemble(space, dofs, [&](int e, Eigen::Matrix<double, 6, 6> &local) {
    const Triangulation &m = space.mesh();
    const auto &gl = m.grad_lambda(e);
    const double area = m.area(e);
    std::array<Vec2, lagrange::kMaxLocalDofs> g{};
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      lagrange::gradients(degree, {1.0 - s - t, s, t}, gl, g);
      const double w = 2.0 * area * q.weights[k];
      for (int i = 0; i < nloc; ++i) {
        const Vec2 ag = a.apply(g[static_cast<std::size_t>(i)]);
        for (int j = 0; j < nloc; ++j)
          local(i, j) += w * dot(ag, g[static_cast<std::size_t>(j)]);
      }
    }
  });
}

Eigen::VectorXd load_vector(const FeSpace &space, const ScalarFunction &g, DofSet dofs, int exactness) {
  const auto &q = quad_rule_triangle(exactness);
  const Triangulation &m = space.mesh();
  const int degree = space.degree();
  const int nloc = space.local_dof_count();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count());
  std::array<double, lagrange::kMaxLocalDofs> phi{};
  for (int e = 0; e < m.element_count(); ++e) {
    const auto &v = m.element_vertices(e);
    const Point p0 = m.vertex(v[0]), p1 = m.vertex(v[1]), p2 = m.vertex(v[2]);
    const double area = m.area(e);
    const auto d = space.element_dofs(e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const Point x = p0 + s * (p1 - p0) + t * (p2 - p0);
      const double gw = 2.0 * area * q.weights[k] * g(x);
      lagrange::values(degree, {1.0 - s - t, s, t}, phi);
      for (int i = 0; i < nloc; ++i)
        b[d[static_cast<std::size_t>(i)]] += gw * phi[static_cast<std::size_t>(i)];
    }
  }
  return dofs == DofSet::free ? restrict_to_free(space, b) : b;
}

SparseMatrix restrict_to_free(const FeSpace &space, const SparseMatrix &full) {
  const auto n = static_cast<int>(space.free_dofs().size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int k = 0; k < full.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(full, k); it; ++it) {
      const int r = space.free_index(static_cast<int>(it.row()));
      const int c = space.free_index(static_cast<int>(it.col()));
      if (r >= 0 && c >= 0)
        triplets.emplace_back(r, c, it.value());
    }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

Eigen::VectorXd restrict_to_free(const FeSpace &space, const Eigen::VectorXd &full) {
  const auto &fd = space.free_dofs();
  Eigen::VectorXd out(static_cast<Eigen::Index>(fd.size()));
  for (std::size_t i = 0; i < fd.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = full[fd[i]];
  return out;
}

Eigen::VectorXd extend_from_free(const FeSpace &space, const Eigen::VectorXd &free) {
  return FeFunction::from_free(space, free).coefficients();
}

double symmetry_defect(const SparseMatrix &m) {
  const SparseMatrix t = m.transpose();
  const double scale = m.norm();
  return scale > 0.0 ? (m - t).norm() / scale : 0.0;
}

SpdSolver::SpdSolver(SparseMatrix m, double tol)
    : matrix_(std::move(m)), tol_(tol), llt_(std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>()) {
  if (matrix_.rows() != matrix_.cols())
    throw InvalidArgument("solver matrix is not square");
  llt_->compute(matrix_);
  if (llt_->info() != Eigen::Success)
    throw SolverFailure("Cholesky factorization failed: matrix is not positive definite");
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd &rhs) const {
  if (rhs.size() != matrix_.rows())
    throw InvalidArgument("right-hand side has the wrong length");
  const double rn = rhs.norm();
  if (rn == 0.0)
    return Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd x = llt_->solve(rhs);
  Eigen::VectorXd r = rhs - matrix_ * x;
  for (int it = 0; it < 3 && r.norm() > tol_ * rn; ++it) {
    x += llt_->solve(r);
    r = rhs - matrix_ * x;
  }
  if (!(r.norm() <= tol_ * rn))
    throw SolverFailure("SPD solve did not reach the requested residual");
  return x;
}

Eigen::VectorXd solve_spd(const SparseMatrix &m, const Eigen::VectorXd &rhs, double tol) {
  return SpdSolver(m, tol).solve(rhs);
}

} // namespace parabest
