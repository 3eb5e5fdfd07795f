#include "parabest/overlay.hpp"

#include "parabest/errors.hpp"
#include "parabest/quadrature.hpp"

#include <algorithm>

namespace parabest {

int container_element(const Triangulation &fine, int e, const Triangulation &coarse) {
  const Forest &f = *fine.forest();
  for (int p = fine.node(e); p >= 0; p = f.node(p).parent) {
    const int c = coarse.element_of_node(p);
    if (c >= 0)
      return c;
  }
  throw InvalidArgument("element is not contained in the coarse mesh");
}

Overlay::Overlay(std::vector<Triangulation> meshes) : meshes_(std::move(meshes)) {
  if (meshes_.empty())
    throw InvalidArgument("overlay of zero meshes");
  common_ = meshes_.front();
  for (std::size_t k = 1; k < meshes_.size(); ++k)
    if (!(meshes_[k] == common_))
      common_ = coarsest_common_refinement(common_, meshes_[k]);
  const int ne = common_.element_count();
  identity_.assign(meshes_.size(), 0);
  containers_.resize(meshes_.size());
  maps_.resize(meshes_.size());
  hat_h_.assign(static_cast<std::size_t>(ne), 0.0);
  for (std::size_t k = 0; k < meshes_.size(); ++k) {
    const Triangulation &m = meshes_[k];
    if (m == common_) {
      identity_[k] = 1;
      for (int e = 0; e < ne; ++e)
        hat_h_[static_cast<std::size_t>(e)] = std::max(hat_h_[static_cast<std::size_t>(e)], common_.diameter(e));
      continue;
    }
    auto &cont = containers_[k];
    auto &maps = maps_[k];
    cont.resize(static_cast<std::size_t>(ne));
    maps.resize(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
      const int c = container_element(common_, e, m);
      cont[static_cast<std::size_t>(e)] = c;
      hat_h_[static_cast<std::size_t>(e)] = std::max(hat_h_[static_cast<std::size_t>(e)], m.diameter(c));
      const auto &cv = m.element_vertices(c);
      const Point p0 = m.vertex(cv[0]), p1 = m.vertex(cv[1]), p2 = m.vertex(cv[2]);
      const auto &ev = common_.element_vertices(e);
      for (int i = 0; i < 3; ++i) {
        const auto b = barycentric(common_.vertex(ev[static_cast<std::size_t>(i)]), p0, p1, p2);
        for (int j = 0; j < 3; ++j)
          maps[static_cast<std::size_t>(e)][static_cast<std::size_t>(3 * i + j)] = b[static_cast<std::size_t>(j)];
      }
    }
  }
}

std::array<double, 3> Overlay::map(int k, int e, const std::array<double, 3> &l) const {
  if (identity_[static_cast<std::size_t>(k)])
    return l;
  const auto &b = maps_[static_cast<std::size_t>(k)][static_cast<std::size_t>(e)];
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j)
    out[static_cast<std::size_t>(j)] = l[0] * b[static_cast<std::size_t>(j)] + l[1] * b[static_cast<std::size_t>(3 + j)] +
                                       l[2] * b[static_cast<std::size_t>(6 + j)];
  return out;
}

bool Overlay::on_skeleton(int k, int edge) const {
  const auto &me = common_.edge(edge);
  if (me.boundary)
    return true;
  return container(k, me.elements[0]) != container(k, me.elements[1]);
}

namespace {

// Integrates sum_i phi_i * (value or gradient term) of `v` against the basis
// of `test` on the overlay of both meshes.
Eigen::VectorXd mixed_action(const FeSpace &test, const FeFunction &v, DofSet dofs, const CoefficientMatrix *a) {
  if (!test.mesh().compatible_with(v.space().mesh()))
    throw IncompatibleMeshes("cross-mesh integral between incompatible meshes");
  const Overlay ov({test.mesh(), v.space().mesh()});
  const Triangulation &c = ov.common();
  const int dt = test.degree(), dv = v.space().degree();
  const int nt = test.local_dof_count();
  const auto &q = quad_rule_triangle(a ? dt + dv - 2 : dt + dv);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(test.dof_count());
  std::array<double, lagrange::kMaxLocalDofs> phi{};
  std::array<Vec2, lagrange::kMaxLocalDofs> gphi{};
  for (int e = 0; e < c.element_count(); ++e) {
    const int et = ov.container(0, e), ev = ov.container(1, e);
    const double area = c.area(e);
    const auto d = test.element_dofs(et);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const std::array<double, 3> l{1.0 - s - t, s, t};
      const auto lt = ov.map(0, e, l);
      const auto lv = ov.map(1, e, l);
      const double w = 2.0 * area * q.weights[k];
      if (a) {
        const Vec2 ag = a->apply(v.gradient_in(ev, lv));
        lagrange::gradients(dt, lt, test.mesh().grad_lambda(et), gphi);
        for (int i = 0; i < nt; ++i)
          b[d[static_cast<std::size_t>(i)]] += w * dot(ag, gphi[static_cast<std::size_t>(i)]);
      } else {
        const double val = v.value_in(ev, lv);
        lagrange::values(dt, lt, phi);
        for (int i = 0; i < nt; ++i)
          b[d[static_cast<std::size_t>(i)]] += w * val * phi[static_cast<std::size_t>(i)];
      }
    }
  }
  return dofs == DofSet::free ? restrict_to_free(test, b) : b;
}

} // namespace

Eigen::VectorXd mixed_mass(const FeSpace &test, const FeFunction &v, DofSet dofs) {
  return mixed_action(test, v, dofs, nullptr);
}

Eigen::VectorXd mixed_stiffness(const FeSpace &test, const FeFunction &v, const CoefficientMatrix &a, DofSet dofs) {
  return mixed_action(test, v, dofs, &a);
}

double l2_norm_of_combination(const std::vector<std::pair<double, const FeFunction *>> &terms) {
  if (terms.empty())
    return 0.0;
  std::vector<Triangulation> meshes;
  int degree = 0;
  for (const auto &[w, f] : terms) {
    (void)w;
    meshes.push_back(f->space().mesh());
    degree = std::max(degree, f->space().degree());
    if (!f->space().mesh().compatible_with(meshes.front()))
      throw IncompatibleMeshes("norm of functions on incompatible meshes");
  }
  const Overlay ov(std::move(meshes));
  const Triangulation &c = ov.common();
  const auto &q = quad_rule_triangle(2 * degree);
  double sum = 0.0;
  for (int e = 0; e < c.element_count(); ++e) {
    const double area = c.area(e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const std::array<double, 3> l{1.0 - s - t, s, t};
      double v = 0.0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const int kj = static_cast<int>(j);
        v += terms[j].first * terms[j].second->value_in(ov.container(kj, e), ov.map(kj, e, l));
      }
      sum += 2.0 * area * q.weights[k] * v * v;
    }
  }
  return std::sqrt(sum);
}

} // namespace parabest
