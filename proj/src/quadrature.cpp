#include "parabest/quadrature.hpp"

#include "parabest/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace parabest {

void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    weights[0] = 2.0;
    return;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  for (int i = 0; i < n; ++i) {
    nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    weights[static_cast<std::size_t>(i)] = 2.0 * v0 * v0;
  }
  // Newton polish on P_n for full double accuracy of the nodes.
  for (int i = 0; i < n; ++i) {
    double x = nodes[static_cast<std::size_t>(i)];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

QuadratureRule make_edge_rule(int exactness) {
  const int n = std::max(1, (exactness + 2) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.exactness = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    r.points.push_back({0.5 * (x[static_cast<std::size_t>(i)] + 1.0), 0.0});
    r.weights.push_back(0.5 * w[static_cast<std::size_t>(i)]);
  }
  return r;
}

// Duffy map (u, v) -> (u, (1 - u) v) with Jacobian (1 - u); the extra factor
// raises the degree in u by one, hence n = ceil((p + 2) / 2) points.
QuadratureRule make_triangle_rule(int exactness) {
  const int n = std::max(1, (exactness + 3) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.exactness = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (x[static_cast<std::size_t>(i)] + 1.0);
    const double wu = 0.5 * w[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (x[static_cast<std::size_t>(j)] + 1.0);
      const double wv = 0.5 * w[static_cast<std::size_t>(j)];
      r.points.push_back({u, (1.0 - u) * v});
      r.weights.push_back(wu * wv * (1.0 - u));
    }
  }
  return r;
}

} // namespace

const QuadratureRule &quad_rule_triangle(int exactness) {
  if (exactness < 0 || exactness > kMaxTriangleExactness)
    throw UnsupportedOrder("triangle quadrature exactness " + std::to_string(exactness) + " not in [0, " +
                           std::to_string(kMaxTriangleExactness) + "]");
  static std::once_flag once;
  static std::vector<QuadratureRule> rules;
  std::call_once(once, [] {
    for (int p = 0; p <= kMaxTriangleExactness; ++p)
      rules.push_back(make_triangle_rule(p));
  });
  return rules[static_cast<std::size_t>(exactness)];
}

const QuadratureRule &quad_rule_edge(int exactness) {
  if (exactness < 0 || exactness > kMaxEdgeExactness)
    throw UnsupportedOrder("edge quadrature exactness " + std::to_string(exactness) + " not in [0, " +
                           std::to_string(kMaxEdgeExactness) + "]");
  static std::once_flag once;
  static std::vector<QuadratureRule> rules;
  std::call_once(once, [] {
    for (int p = 0; p <= kMaxEdgeExactness; ++p)
      rules.push_back(make_edge_rule(p));
  });
  return rules[static_cast<std::size_t>(exactness)];
}

} // namespace parabest
