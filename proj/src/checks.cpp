#include "parabest/checks.hpp"

#include "parabest/errors.hpp"
#include "parabest/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

namespace parabest {

std::vector<CheckResult> check_pointwise_form(const std::string &preset_name, int runs) {
  RunConfig config;
  config.preset = preset(preset_name);
  config.preset.runs = std::min(runs, config.preset.runs);
  double defect = 0.0, agreement = 0.0;
  for (int i = 1; i <= config.preset.runs; ++i) {
    const RunResult r = run_single(config, i);
    defect = std::max(defect, r.max_pointwise_defect);
    agreement = std::max(agreement, r.max_elliptic_agreement);
  }
  const std::string where = "preset " + config.preset.name + ", runs 1.." + std::to_string(config.preset.runs);
  return {
      {"pointwise form defect", defect <= 1e-10, defect, 1e-10, where},
      {"independent A^n U^n agreement", agreement <= 1e-8, agreement, 1e-8, where},
  };
}

namespace {

Triangulation refine_box(const Triangulation &t, Point lo, Point hi) {
  MeshChange c;
  c.lo = lo;
  c.hi = hi;
  return apply_mesh_change(t, c);
}

FeFunction random_function(const FeSpace &space, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd free(static_cast<Eigen::Index>(space.free_dofs().size()));
  for (Eigen::Index i = 0; i < free.size(); ++i)
    free[i] = u(rng);
  return FeFunction::from_free(space, free);
}

CoefficientMatrix random_coefficient(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l1 = 0.5 + u(rng), l2 = 0.5 + u(rng), th = 3.0 * u(rng);
  const double c = std::cos(th), s = std::sin(th);
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

// (A v, phi) + (J, phi) on the interior skeleton.
double represented(const FeFunction &v, const FeFunction &phi, const CoefficientMatrix &a) {
  const Triangulation &m = v.space().mesh();
  const auto strong = strong_operator(v, a);
  const EdgeField jump = jump_residual(v, a);
  const auto &q = quad_rule_triangle(4);
  double sum = 0.0;
  for (int e = 0; e < m.element_count(); ++e) {
    double integral = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      integral += q.weights[k] * phi.value_in(e, {1.0 - s - t, s, t});
    }
    sum += strong[static_cast<std::size_t>(e)] * 2.0 * m.area(e) * integral;
  }
  const auto gp = EdgeField::gauss_parameters();
  for (int i = 0; i < m.edge_count(); ++i) {
    const MeshEdge &me = m.edge(i);
    if (me.boundary)
      continue;
    const int e = me.elements[0];
    const auto &ev = m.element_vertices(e);
    const Point x0 = m.vertex(me.v0), x1 = m.vertex(me.v1);
    for (int g = 0; g < 2; ++g) {
      const Point x = x0 + gp[static_cast<std::size_t>(g)] * (x1 - x0);
      const auto l = barycentric(x, m.vertex(ev[0]), m.vertex(ev[1]), m.vertex(ev[2]));
      sum += 0.5 * m.edge_length(i) * jump[i][static_cast<std::size_t>(g)] * phi.value_in(e, l);
    }
  }
  return sum;
}

} // namespace

CheckResult check_representation_identity(int pairs_per_mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Triangulation base = uniform_refine(build_macro_square(2), 1);
  const Triangulation once = refine_box(base, {-0.6, -0.6}, {0.3, 0.4});
  const Triangulation twice = refine_box(once, {-0.2, -0.5}, {0.5, 0.2});
  double worst = 0.0;
  int count = 0;
  for (const Triangulation *mesh : {&base, &once, &twice}) {
    for (int pair = 0; pair < pairs_per_mesh; ++pair) {
      const int degree = 1 + pair % 2;
      const FeSpace space = build_space(*mesh, degree);
      const CoefficientMatrix a = random_coefficient(rng);
      const FeFunction v = random_function(space, rng);
      const FeFunction phi = random_function(space, rng);
      const SparseMatrix k = stiffness_matrix(space, a, DofSet::all);
      const double lhs = phi.coefficients().dot(k * v.coefficients());
      const double rhs = represented(v, phi, a);
      const double scale = std::sqrt(v.coefficients().dot(k * v.coefficients()) *
                                     phi.coefficients().dot(k * phi.coefficients()));
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
      ++count;
    }
  }
  std::ostringstream d;
  d << count << " pairs on 3 meshes, degrees 1 and 2";
  return {"representation identity", worst <= 1e-10, worst, 1e-10, d.str()};
}

namespace {

Triangulation random_refinement(const Triangulation &base, std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> rounds(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Triangulation t = base;
  const int r = rounds(rng);
  for (int k = 0; k < r; ++k) {
    std::vector<int> marked;
    const double p = 0.1 + 0.3 * u(rng);
    for (int e = 0; e < t.element_count(); ++e)
      if (u(rng) < p)
        marked.push_back(e);
    if (!marked.empty())
      t = bisect_marked(t, marked);
  }
  return t;
}

Point random_point(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng)};
}

bool strictly_inside(const Triangulation &t, int e, Point x) {
  const auto &v = t.element_vertices(e);
  const auto l = barycentric(x, t.vertex(v[0]), t.vertex(v[1]), t.vertex(v[2]));
  return l[0] > 1e-12 && l[1] > 1e-12 && l[2] > 1e-12;
}

} // namespace

CheckResult check_mesh_algebra(int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Triangulation base = uniform_refine(build_macro_square(2), 1);
  int failures = 0;
  std::string first;
  const auto expect = [&](bool ok, const std::string &what, int pair) {
    if (!ok) {
      if (failures == 0)
        first = "pair " + std::to_string(pair) + ": " + what;
      ++failures;
    }
  };
  for (int pair = 0; pair < pairs; ++pair) {
    const Triangulation a = random_refinement(base, rng);
    const Triangulation b = random_refinement(base, rng);
    const Triangulation fine = coarsest_common_refinement(a, b);
    const Triangulation coarse = finest_common_coarsening(a, b);

    expect(a.is_conforming() && b.is_conforming(), "inputs not conforming", pair);
    expect(fine.is_conforming(), "common refinement not conforming", pair);
    expect(coarse.is_conforming(), "common coarsening not conforming", pair);
    expect(fine == coarsest_common_refinement(b, a), "refinement not commutative", pair);
    expect(coarse == finest_common_coarsening(b, a), "coarsening not commutative", pair);
    expect(coarsest_common_refinement(a, a) == a && finest_common_coarsening(a, a) == a, "not idempotent", pair);
    expect(finest_common_coarsening(a, fine) == a, "absorption (coarsen, refine) fails", pair);
    expect(coarsest_common_refinement(a, coarse) == a, "absorption (refine, coarsen) fails", pair);
    expect(refines(fine, a) && refines(fine, b), "common refinement does not refine both", pair);
    expect(refines(a, coarse) && refines(b, coarse), "common coarsening not refined by both", pair);

    for (int s = 0; s < 20; ++s) {
      const Point x = random_point(rng);
      const double ha = a.diameter(a.locate(x)), hb = b.diameter(b.locate(x));
      expect(std::abs(coarse.diameter(coarse.locate(x)) - std::max(ha, hb)) <= 1e-14, "h-hat is not the max", pair);
      expect(std::abs(fine.diameter(fine.locate(x)) - std::min(ha, hb)) <= 1e-14, "h-check is not the min", pair);
    }

    // Any two elements are nested or have disjoint interiors.
    const auto &forest = *a.forest();
    std::uniform_int_distribution<int> pick_a(0, a.element_count() - 1), pick_b(0, b.element_count() - 1);
    for (int s = 0; s < 20; ++s) {
      const int ea = pick_a(rng), eb = pick_b(rng);
      const int na = a.node(ea), nb = b.node(eb);
      if (forest.is_ancestor_or_self(na, nb) || forest.is_ancestor_or_self(nb, na))
        continue;
      const auto &va = a.element_vertices(ea);
      const Point c{(a.vertex(va[0]).x + a.vertex(va[1]).x + a.vertex(va[2]).x) / 3.0,
                    (a.vertex(va[0]).y + a.vertex(va[1]).y + a.vertex(va[2]).y) / 3.0};
      bool overlap = strictly_inside(b, eb, c);
      for (int k = 0; k < 3 && !overlap; ++k)
        overlap = strictly_inside(b, eb, 0.5 * (c + a.vertex(va[static_cast<std::size_t>(k)])));
      expect(!overlap, "elements neither nested nor disjoint", pair);
    }
  }
  std::ostringstream d;
  d << pairs << " random pairs, " << failures << " violations";
  if (failures)
    d << "; first: " << first;
  return {"mesh algebra", failures == 0, static_cast<double>(failures), 0.0, d.str()};
}

MeshChangeReport run_mesh_change_scenario(ProblemKind problem, int degree) {
  const BenchmarkProblem bp = make_benchmark(problem);
  const BackwardEuler stepper(bp.data());
  const EstimatorSuite suite(stepper, ConstantsTable{});
  ErrorAccumulator errors(bp.u, bp.a);

  const Triangulation base = build_macro_square(8);
  const Triangulation refined = refine_box(refine_box(base, {-0.5, -0.5}, {0.5, 0.5}), {-0.5, -0.5}, {0.5, 0.5});
  const FeSpace coarse_space = build_space(base, degree), fine_space = build_space(refined, degree);
  const double tau = 0.01;

  MeshChangeReport out;
  TimeSlabState prev = stepper.initial_state(coarse_space);
  errors.initial(prev);
  const EstimatorRecord r0 = suite.initial(prev);
  BoundAccumulator acc(r0.lowEtaRecInf + errors.values().LinfL2, r0.lowEtaRec2 + errors.values().LinfH1);
  acc.add(r0);
  out.elements.push_back(base.element_count());
  out.min_ratio_32 = out.min_ratio_33 = std::numeric_limits<double>::infinity();

  std::optional<TimeSlabState> prev2;
  const FeSpace *schedule[] = {&coarse_space, &fine_space, &coarse_space};
  for (const FeSpace *space : schedule) {
    TimeSlabState cur = stepper.step(prev, *space, tau);
    const EstimatorRecord rec = suite.record(prev2 ? &*prev2 : nullptr, prev, cur);
    acc.add(rec);
    errors.add(prev, cur);
    out.changed_part += rec.lowSpaceChanged;
    out.elements.push_back(space->mesh().element_count());
    const auto &t = acc.totals();
    out.min_ratio_32 = std::min(out.min_ratio_32, t.total_32 / errors.values().LinfL2);
    out.min_ratio_33 = std::min(out.min_ratio_33, t.total_33 / errors.values().L2H1);
    prev2 = std::move(prev);
    prev = std::move(cur);
  }
  return out;
}

std::vector<CheckResult> check_mesh_change() {
  const MeshChangeReport r = run_mesh_change_scenario();
  std::ostringstream d;
  d << "elements per step:";
  for (int n : r.elements)
    d << ' ' << n;
  return {
      {"mesh change: changed-edge contribution", r.changed_part > 0.0, r.changed_part, 0.0, d.str()},
      {"mesh change: total bounds the error", r.min_ratio_32 >= 1.0 && r.min_ratio_33 >= 1.0,
       std::min(r.min_ratio_32, r.min_ratio_33), 1.0, "min of total/error over steps and both bounds"},
  };
}

std::vector<CheckResult> run_all_checks() {
  std::vector<CheckResult> out = check_pointwise_form("1", 2);
  out.push_back(check_representation_identity());
  out.push_back(check_mesh_algebra());
  for (auto &r : check_mesh_change())
    out.push_back(std::move(r));
  return out;
}

} // namespace parabest
