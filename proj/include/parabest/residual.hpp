#pragma once

// Elementwise and edgewise polynomial fields: the inner residual
// R = (strong operator) - (discrete operator) and the normal-flux jump J.

#include "parabest/overlay.hpp"

#include <span>

namespace parabest {

/// Discontinuous piecewise polynomial of degree 0, 1 or 2 stored by its
/// local Lagrange values on every element.
class ElementField {
public:
  ElementField() = default;
  ElementField(Triangulation mesh, int degree);

  const Triangulation &mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int local_count() const { return nloc_; }
  std::span<double> local(int e) { return {values_.data() + static_cast<std::ptrdiff_t>(e) * nloc_, static_cast<std::size_t>(nloc_)}; }
  std::span<const double> local(int e) const {
    return {values_.data() + static_cast<std::ptrdiff_t>(e) * nloc_, static_cast<std::size_t>(nloc_)};
  }
  double value_in(int e, const std::array<double, 3> &l) const;
  const std::vector<double> &values() const { return values_; }

  /// a * x + b * y on the same mesh and degree.
  static ElementField combine(double a, const ElementField &x, double b, const ElementField &y);
  /// Re-expresses the field on the common refinement of an overlay, taking
  /// it from input mesh k.
  ElementField on_overlay(const Overlay &ov, int k) const;

private:
  Triangulation mesh_;
  int degree_ = 0;
  int nloc_ = 1;
  std::vector<double> values_;
};

/// Values at the two Gauss points of every edge, ordered from the edge's
/// local vertex v0 to v1; enough for polynomials of degree <= 1 along the
/// edge. Boundary edges carry zeros.
class EdgeField {
public:
  EdgeField() = default;
  explicit EdgeField(Triangulation mesh);

  const Triangulation &mesh() const { return mesh_; }
  std::array<double, 2> &operator[](int i) { return values_[static_cast<std::size_t>(i)]; }
  const std::array<double, 2> &operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return values_.size(); }

  static EdgeField combine(double a, const EdgeField &x, double b, const EdgeField &y);

  /// Parameters of the two Gauss points on [0, 1].
  static std::array<double, 2> gauss_parameters();

private:
  Triangulation mesh_;
  std::vector<std::array<double, 2>> values_;
};

/// Elementwise constant -div(A grad v) for v of degree <= 2.
std::vector<double> strong_operator(const FeFunction &v, const CoefficientMatrix &a);

/// R = (strong operator of v) - av, with av the discrete operator applied
/// to v (a function in the same space).
ElementField inner_residual(const FeFunction &v, const FeFunction &av, const CoefficientMatrix &a);

/// J[v] = (A grad v|K0 - A grad v|K1) . nu on interior edges, nu pointing from
/// the edge's first element K0 into the second K1.
EdgeField jump_residual(const FeFunction &v, const CoefficientMatrix &a);

/// Jump of sum_j w_j v_j on the skeleton of the overlay's common refinement;
/// terms[j] lives on overlay mesh index[j].
struct OverlayTerm {
  int mesh = 0;
  double weight = 1.0;
  const FeFunction *function = nullptr;
};
EdgeField jump_on_overlay(const Overlay &ov, const std::vector<OverlayTerm> &terms, const CoefficientMatrix &a);

/// Per-edge weight: largest diameter of the adjacent elements.
std::vector<double> edge_meshsize(const Triangulation &t);

/// (sum_K h_K^{2p} int_K r^2)^{1/2}.
double weighted_norm(const ElementField &r, double p, std::span<const double> h);
/// (sum_E h_E^{2p} int_E j^2)^{1/2}; edges with mask[i] == 0 are skipped.
double weighted_norm(const EdgeField &j, double p, std::span<const double> h_edge,
                     const std::vector<char> *mask = nullptr);

} // namespace parabest
