#pragma once

// Backward Euler-Galerkin time stepping with possibly changing meshes.

#include "parabest/field.hpp"
#include "parabest/residual.hpp"

#include <iosfwd>
#include <limits>
#include <list>
#include <map>
#include <mutex>

namespace parabest {

/// Problem data of u_t - div(A grad u) = f, u = 0 on the boundary, u(0) = g.
struct ProblemData {
  CoefficientMatrix a;
  SpaceTimeFunction f = SpaceTimeFunction::zero();
  ScalarFunction initial = [](const Point &) { return 0.0; };
  double final_time = 1.0;
};

/// Matrices and data-dependent precomputations attached to one space.
class SpaceOperators {
public:
  SpaceOperators(const FeSpace &space, const ProblemData &data, int exactness);

  const FeSpace &space() const { return space_; }
  const SparseMatrix &mass_full() const { return mass_full_; }
  const SparseMatrix &stiffness_full() const { return stiffness_full_; }
  const SparseMatrix &mass() const { return mass_free_.matrix(); }
  const SparseMatrix &stiffness() const { return stiffness_; }
  const SpdSolver &mass_solver() const { return mass_free_; }
  /// Factorization of M + tau K, created on first use.
  const SpdSolver &step_solver(double tau) const;

  const std::vector<double> &h() const { return h_; }
  const std::vector<double> &h_edge() const { return h_edge_; }

  /// Separable right-hand side f = sum_k s_k(t) g_k: load vectors (g_k, phi)
  /// and projections P g_k on the free dofs.
  bool separable() const { return !loads_.empty(); }
  const std::vector<Eigen::VectorXd> &loads() const { return loads_; }
  const std::vector<Eigen::VectorXd> &projections() const { return projections_; }
  /// G_kl = sum_K h_K^2 int_K (P g_k - g_k)(P g_l - g_l).
  const Eigen::MatrixXd &defect_gram() const { return defect_gram_; }
  /// H_kl = int g_k g_l.
  const Eigen::MatrixXd &data_gram() const { return data_gram_; }

private:
  FeSpace space_;
  SparseMatrix mass_full_, stiffness_full_, stiffness_;
  SpdSolver mass_free_;
  mutable std::mutex step_mutex_;
  mutable std::map<double, std::shared_ptr<SpdSolver>> step_solvers_;
  std::vector<double> h_, h_edge_;
  std::vector<Eigen::VectorXd> loads_, projections_;
  Eigen::MatrixXd defect_gram_, data_gram_;
};

/// Everything attached to step n.
struct TimeSlabState {
  int n = 0;
  double t_prev = 0.0;
  double t = 0.0;
  double tau = 0.0;
  FeSpace space;
  FeFunction U;
  FeFunction fBar;   ///< P^n f(t_n)
  FeFunction dBarU;  ///< (U^n - P^n U^{n-1}) / tau_n
  FeFunction AnUn;   ///< discrete elliptic operator applied to U^n
  ElementField inner_residual;
  EdgeField jump_residual;
  /// ||dBarU + A^n U^n - fBar|| / (||A^n U^n|| + ||fBar||) with A^n U^n
  /// recomputed from the stiffness matrix; NaN when not verified.
  double pointwise_defect = std::numeric_limits<double>::quiet_NaN();
  /// Relative difference of the two computations of A^n U^n.
  double elliptic_agreement = std::numeric_limits<double>::quiet_NaN();
};

struct StepOptions {
  int exactness = 8;          ///< quadrature for data integrals
  bool verify = true;         ///< recompute A^n U^n independently
  double min_tau_fraction = 1e-14;
};

class BackwardEuler {
public:
  explicit BackwardEuler(ProblemData data, StepOptions options = {});

  const ProblemData &data() const { return data_; }
  const StepOptions &options() const { return options_; }

  TimeSlabState initial_state(const FeSpace &space) const;
  TimeSlabState step(const TimeSlabState &prev, const FeSpace &space, double tau) const;

  /// Cached operators of a space (the most recent few spaces are kept).
  std::shared_ptr<const SpaceOperators> operators(const FeSpace &space) const;

private:
  void fill_residuals(TimeSlabState &s) const;

  ProblemData data_;
  StepOptions options_;
  mutable std::mutex cache_mutex_;
  mutable std::list<std::shared_ptr<const SpaceOperators>> cache_;
};

/// L2 projection onto the space (zero boundary trace).
FeFunction l2_project(const FeSpace &target, const FeFunction &v);
FeFunction l2_project(const FeSpace &target, const ScalarFunction &v, int exactness = 8);
/// (A^n v, phi) = a(v, phi) for all phi in the space.
FeFunction discrete_elliptic(const FeSpace &space, const FeFunction &v, const CoefficientMatrix &a);

/// Text checkpoint: mesh, space and the coefficient vectors of U, fBar,
/// dBarU and AnUn. Residuals are recomputed on load.
void write_state(std::ostream &os, const TimeSlabState &s);
TimeSlabState read_state(std::istream &is, const CoefficientMatrix &a);

} // namespace parabest
