#pragma once

#include <array>
#include <vector>

namespace parabest {

/// Quadrature on the reference triangle {(s, t) : s, t >= 0, s + t <= 1}
/// (weights sum to 1/2) or on the unit segment [0, 1] (weights sum to 1).
/// For segment rules only the first coordinate of each point is used.
struct QuadratureRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxTriangleExactness = 30;
inline constexpr int kMaxEdgeExactness = 31;

/// Collapsed Gauss-Legendre product rule exact for total degree `exactness`.
const QuadratureRule &quad_rule_triangle(int exactness);
/// Gauss-Legendre rule on [0, 1] exact for degree `exactness`.
const QuadratureRule &quad_rule_edge(int exactness);

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights);

} // namespace parabest
