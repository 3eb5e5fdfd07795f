#include "support.hpp"

#include "parabest/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace test;

namespace {

double max_h(const Triangulation &t) {
  const auto h = meshsize(t);
  return *std::max_element(h.begin(), h.end());
}

} // namespace

TEST_CASE("macro triangulation counts") {
  const Triangulation one = build_macro_square(1);
  CHECK(one.element_count() == 2);
  CHECK(one.vertex_count() == 4);
  CHECK(build_macro_square(2).element_count() == 4 * one.element_count());
  CHECK(build_macro_square(4).element_count() == 32);
  CHECK_THROWS_AS(build_macro_square(0), InvalidArgument);
  CHECK(build_macro_square(3).is_conforming());
}

TEST_CASE("uniform refinement") {
  const Triangulation t = square(2);
  CHECK(uniform_refine(t, 0) == t);
  const Triangulation r = uniform_refine(t, 1);
  CHECK(r.element_count() == 4 * t.element_count());
  CHECK(max_h(r) == doctest::Approx(max_h(t) / 2).epsilon(1e-14));
  CHECK(r.is_conforming());
  CHECK(r.min_angle() >= t.min_angle() - 1e-12);
  CHECK(refines(r, t));
  CHECK_FALSE(refines(t, r));
}

TEST_CASE("meshsize") {
  const Triangulation t = unit_triangle();
  CHECK(meshsize(t)[0] == doctest::Approx(std::sqrt(2.0)));
  for (double h : meshsize(square(2, 2)))
    CHECK(h > 0.0);
}

TEST_CASE("bisect_marked") {
  const Triangulation t = square(2, 1);
  std::vector<int> none;
  CHECK(bisect_marked(t, none) == t);
  std::vector<int> one{5};
  const Triangulation r = bisect_marked(t, one);
  CHECK(r.element_count() > t.element_count());
  CHECK(r.is_conforming());
  CHECK(r.min_angle() >= std::numbers::pi / 4 - 1e-12);
  CHECK(refines(r, t));

  // Elements of the two meshes are nested or have disjoint interiors.
  const auto &forest = *t.forest();
  for (int a = 0; a < r.element_count(); ++a)
    for (int b = 0; b < t.element_count(); ++b) {
      const int na = r.node(a), nb = t.node(b);
      const bool nested = forest.is_ancestor_or_self(na, nb) || forest.is_ancestor_or_self(nb, na);
      const auto &va = r.element_vertices(a);
      const Point c = (1.0 / 3.0) * (r.vertex(va[0]) + r.vertex(va[1]) + r.vertex(va[2]));
      const auto &vb = t.element_vertices(b);
      const auto l = barycentric(c, t.vertex(vb[0]), t.vertex(vb[1]), t.vertex(vb[2]));
      const bool inside = l[0] > 0 && l[1] > 0 && l[2] > 0;
      CHECK(inside == nested);
    }
}

TEST_CASE("common coarsening and refinement") {
  const Triangulation t = square(2);
  const Triangulation r = uniform_refine(t, 1);
  CHECK(finest_common_coarsening(t, t) == t);
  CHECK(coarsest_common_refinement(t, t) == t);
  CHECK(finest_common_coarsening(t, r) == t);
  CHECK(coarsest_common_refinement(t, r) == r);

  std::mt19937_64 rng(3);
  for (int pair = 0; pair < 10; ++pair) {
    const Triangulation a = random_refinement(t, rng), b = random_refinement(t, rng);
    const Triangulation hat = finest_common_coarsening(a, b), check = coarsest_common_refinement(a, b);
    CHECK(hat.is_conforming());
    CHECK(check.is_conforming());
    CHECK(coarsest_common_refinement(a, hat) == a);
    CHECK(finest_common_coarsening(a, check) == a);
    for (int s = 0; s < 100; ++s) {
      const Point x = random_point(rng);
      const double ha = a.diameter(a.locate(x)), hb = b.diameter(b.locate(x));
      CHECK(hat.diameter(hat.locate(x)) == std::max(ha, hb));
      CHECK(check.diameter(check.locate(x)) == std::min(ha, hb));
    }
  }
}

TEST_CASE("edge sets") {
  const Triangulation t = square(2, 1);
  const auto keys = t.interior_edge_keys();
  const EdgeSets same = edge_sets(t, t);
  CHECK(same.common.size() == keys.size());
  CHECK(same.changed.empty());

  const Triangulation r = uniform_refine(t, 1);
  const EdgeSets es = edge_sets(t, r);
  const auto kt = t.interior_edge_keys(), kr = r.interior_edge_keys();
  const std::set<EdgeKey> st(kt.begin(), kt.end()), sr(kr.begin(), kr.end());
  std::set<EdgeKey> both, either;
  for (auto k : st) {
    either.insert(k);
    if (sr.count(k))
      both.insert(k);
  }
  either.insert(sr.begin(), sr.end());
  CHECK(std::set<EdgeKey>(es.common.begin(), es.common.end()) == both);
  CHECK(es.unite.size() == either.size());
  CHECK(es.common.empty());

  std::mt19937_64 rng(5);
  const Triangulation a = random_refinement(t, rng), b = random_refinement(t, rng);
  auto ab = edge_sets(a, b).changed, ba = edge_sets(b, a).changed;
  std::sort(ab.begin(), ab.end());
  std::sort(ba.begin(), ba.end());
  CHECK(ab == ba);
}

TEST_CASE("incompatible meshes") {
  const Triangulation a = build_macro_square(2), b = build_macro_square(2);
  CHECK_FALSE(a.compatible_with(b));
  CHECK_THROWS_AS(coarsest_common_refinement(a, b), IncompatibleMeshes);
}

TEST_CASE("mesh dump round trip") {
  std::mt19937_64 rng(9);
  const Triangulation t = random_refinement(square(2), rng);
  std::stringstream ss;
  write_mesh(ss, t);
  const Triangulation back = read_mesh(ss);
  CHECK(back == t);
  CHECK(back.element_count() == t.element_count());
}
