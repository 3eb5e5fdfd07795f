#pragma once

// Mass and stiffness matrices, load vectors and the SPD solve used by the
// time stepper.

#include "parabest/fespace.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>

namespace parabest {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Constant symmetric positive definite diffusion matrix
/// [[a11, a12], [a12, a22]] with ellipticity and continuity bounds.
class CoefficientMatrix {
public:
  CoefficientMatrix() = default;
  /// Bounds default to the extreme eigenvalues.
  CoefficientMatrix(double a11, double a12, double a22);
  CoefficientMatrix(double a11, double a12, double a22, double alpha, double beta);

  static CoefficientMatrix identity() { return {}; }

  double a11() const { return a11_; }
  double a12() const { return a12_; }
  double a22() const { return a22_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  Vec2 apply(Vec2 v) const { return {a11_ * v.x + a12_ * v.y, a12_ * v.x + a22_ * v.y}; }
  bool is_identity() const { return a11_ == 1.0 && a12_ == 0.0 && a22_ == 1.0; }

private:
  double a11_ = 1.0, a12_ = 0.0, a22_ = 1.0;
  double alpha_ = 1.0, beta_ = 1.0;
};

enum class DofSet { all, free };

/// Reference mass matrix of the local Lagrange basis scaled so that
/// (local mass on K) = |K| * reference_mass(degree). Degree 0 is the
/// single constant function.
const Eigen::MatrixXd &reference_mass(int degree);

SparseMatrix mass_matrix(const FeSpace &space, DofSet dofs = DofSet::free);
SparseMatrix stiffness_matrix(const FeSpace &space, const CoefficientMatrix &a, DofSet dofs = DofSet::free);
/// b_i = int g phi_i by quadrature of the given exactness.
Eigen::VectorXd load_vector(const FeSpace &space, const ScalarFunction &g, DofSet dofs = DofSet::free,
                            int exactness = 8);

/// Rows and columns of the free dofs of a full-dof matrix.
SparseMatrix restrict_to_free(const FeSpace &space, const SparseMatrix &full);
Eigen::VectorXd restrict_to_free(const FeSpace &space, const Eigen::VectorXd &full);
Eigen::VectorXd extend_from_free(const FeSpace &space, const Eigen::VectorXd &free);

double symmetry_defect(const SparseMatrix &m);

/// Sparse Cholesky factorization with a relative residual check on every
/// solve.
class SpdSolver {
public:
  explicit SpdSolver(SparseMatrix m, double tol = 1e-10);

  Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const;
  const SparseMatrix &matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }

private:
  SparseMatrix matrix_;
  double tol_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
};

Eigen::VectorXd solve_spd(const SparseMatrix &m, const Eigen::VectorXd &rhs, double tol = 1e-10);

} // namespace parabest
