#pragma once

// Common refinement of several compatible meshes. Every element of the
// common refinement lies inside exactly one element of each input mesh (its
// container), so piecewise polynomials of any input mesh are polynomials on
// it and cross-mesh integrals can be computed exactly.

#include "parabest/assembly.hpp"

namespace parabest {

class Overlay {
public:
  explicit Overlay(std::vector<Triangulation> meshes);

  const Triangulation &common() const { return common_; }
  int mesh_count() const { return static_cast<int>(meshes_.size()); }
  const Triangulation &mesh(int k) const { return meshes_[static_cast<std::size_t>(k)]; }

  /// Element of mesh k containing element e of the common refinement.
  int container(int k, int e) const {
    return identity_[static_cast<std::size_t>(k)] ? e : containers_[static_cast<std::size_t>(k)][static_cast<std::size_t>(e)];
  }
  /// True if mesh k coincides with the common refinement.
  bool identity(int k) const { return identity_[static_cast<std::size_t>(k)]; }
  /// Barycentric coordinates in the container of mesh k of the point with
  /// barycentric coordinates l in common element e.
  std::array<double, 3> map(int k, int e, const std::array<double, 3> &l) const;

  /// Largest container diameter over all meshes (the meshsize of the finest
  /// common coarsening for two meshes).
  double hat_h(int e) const { return hat_h_[static_cast<std::size_t>(e)]; }
  /// True if interior edge i of the common refinement lies on the skeleton
  /// of mesh k.
  bool on_skeleton(int k, int edge) const;

private:
  std::vector<Triangulation> meshes_;
  Triangulation common_;
  std::vector<char> identity_;
  std::vector<std::vector<int>> containers_;
  std::vector<std::vector<std::array<double, 9>>> maps_;
  std::vector<double> hat_h_;
};

/// Container of element e of `fine` in `coarse` (fine must refine coarse).
int container_element(const Triangulation &fine, int e, const Triangulation &coarse);

/// b_i = int v phi_i for the basis of `test`, integrated exactly on the
/// common refinement.
Eigen::VectorXd mixed_mass(const FeSpace &test, const FeFunction &v, DofSet dofs = DofSet::free);
/// b_i = a(v, phi_i), integrated exactly on the common refinement.
Eigen::VectorXd mixed_stiffness(const FeSpace &test, const FeFunction &v, const CoefficientMatrix &a,
                                DofSet dofs = DofSet::free);

/// L2 norm of sum_j w_j v_j for functions on possibly different meshes.
double l2_norm_of_combination(const std::vector<std::pair<double, const FeFunction *>> &terms);

} // namespace parabest
