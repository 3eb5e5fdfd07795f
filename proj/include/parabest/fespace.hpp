#pragma once

// Continuous Lagrange spaces of degree 1 or 2 with zero Dirichlet trace.

#include "parabest/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace parabest {

using ScalarFunction = std::function<double(const Point &)>;

namespace lagrange {

inline constexpr int kMaxLocalDofs = 6;

/// Number of local dofs: 3 for P1, 6 for P2 (vertices, then the midpoint of
/// the edge opposite each vertex).
constexpr int local_dofs(int degree) { return degree == 1 ? 3 : 6; }

/// Basis values at barycentric coordinates `l`.
void values(int degree, const std::array<double, 3> &l, std::array<double, kMaxLocalDofs> &out);
/// Basis gradients given the element's barycentric gradients.
void gradients(int degree, const std::array<double, 3> &l, const std::array<Vec2, 3> &grad_l,
               std::array<Vec2, kMaxLocalDofs> &out);
/// Barycentric coordinates of the local Lagrange nodes.
std::array<double, 3> node_barycentric(int degree, int i);

} // namespace lagrange

/// Degree-l Lagrange space on a triangulation. Immutable; copies share data.
class FeSpace {
public:
  FeSpace() = default;
  FeSpace(Triangulation mesh, int degree);

  const Triangulation &mesh() const;
  int degree() const;
  int dof_count() const;
  int local_dof_count() const { return lagrange::local_dofs(degree()); }
  std::span<const int> element_dofs(int e) const;
  const std::vector<Point> &dof_coordinates() const;
  bool is_boundary_dof(int dof) const;
  int boundary_dof_count() const;
  /// Interior dofs in increasing order.
  const std::vector<int> &free_dofs() const;
  /// Position of a dof in free_dofs(), or -1 on the boundary.
  int free_index(int dof) const;

  friend bool operator==(const FeSpace &a, const FeSpace &b);
  bool valid() const { return static_cast<bool>(data_); }

private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// Coefficient vector over all dofs of a space; boundary entries are zero.
class FeFunction {
public:
  FeFunction() = default;
  explicit FeFunction(FeSpace space);
  FeFunction(FeSpace space, Eigen::VectorXd coefficients);

  const FeSpace &space() const { return space_; }
  const Eigen::VectorXd &coefficients() const { return coefficients_; }
  Eigen::VectorXd &coefficients() { return coefficients_; }

  /// Value on element e at barycentric coordinates l.
  double value_in(int e, const std::array<double, 3> &l) const;
  Vec2 gradient_in(int e, const std::array<double, 3> &l) const;
  /// Local coefficient vector of element e.
  void local(int e, std::array<double, lagrange::kMaxLocalDofs> &out) const;

  /// Interior coefficients, ordered as FeSpace::free_dofs().
  Eigen::VectorXd free_part() const;
  static FeFunction from_free(const FeSpace &space, const Eigen::VectorXd &free);

private:
  FeSpace space_;
  Eigen::VectorXd coefficients_;
};

FeSpace build_space(const Triangulation &mesh, int degree);

/// Point evaluation; throws OutsideDomain if x is not in the closed domain.
double evaluate(const FeFunction &f, Point x);
Vec2 evaluate_gradient(const FeFunction &f, Point x);

/// Nodal interpolant; boundary dofs are set to zero.
FeFunction interpolate(const FeSpace &space, const ScalarFunction &g);

/// Exact re-representation in a space that contains the source space.
FeFunction transfer(const FeFunction &f, const FeSpace &target);
/// True if every function of `source` belongs to `target`.
bool is_subspace(const FeSpace &source, const FeSpace &target);

/// Text dump: mesh block followed by `space <degree> <ndofs>` and one
/// coefficient per line.
void write_function(std::ostream &os, const FeFunction &f);
FeFunction read_function(std::istream &is);

} // namespace parabest
