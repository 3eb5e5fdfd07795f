#pragma once

#include "parabest/benchmark.hpp"
#include "parabest/errors.hpp"

#include <random>

namespace test {

using namespace parabest;

inline Triangulation unit_triangle() {
  auto forest = Forest::create({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{{1, 2, 0}}});
  return Triangulation(forest, {0});
}

inline Triangulation square(int subdivisions = 2, int levels = 0) {
  return uniform_refine(build_macro_square(subdivisions), levels);
}

inline Triangulation random_refinement(const Triangulation &base, std::mt19937_64 &rng, int rounds = 3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Triangulation t = base;
  for (int r = 0; r < rounds; ++r) {
    std::vector<int> marked;
    for (int e = 0; e < t.element_count(); ++e)
      if (u(rng) < 0.25)
        marked.push_back(e);
    t = bisect_marked(t, marked);
  }
  return t;
}

inline FeFunction random_function(const FeSpace &space, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(space.free_dofs().size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = u(rng);
  return FeFunction::from_free(space, v);
}

inline Point random_point(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  return {u(rng), u(rng)};
}

} // namespace test
