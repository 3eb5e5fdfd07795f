#include "parabest/residual.hpp"

#include "parabest/errors.hpp"

#include <algorithm>
#include <cmath>

namespace parabest {

namespace {

double local_value(int degree, std::span<const double> c, const std::array<double, 3> &l) {
  if (degree == 0)
    return c[0];
  std::array<double, lagrange::kMaxLocalDofs> phi{};
  lagrange::values(degree, l, phi);
  double v = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    v += c[i] * phi[i];
  return v;
}

int local_count_of(int degree) { return degree == 0 ? 1 : lagrange::local_dofs(degree); }

} // namespace

ElementField::ElementField(Triangulation mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), nloc_(local_count_of(degree)) {
  if (degree < 0 || degree > 2)
    throw UnsupportedDegree("element fields support degrees 0..2");
  values_.assign(static_cast<std::size_t>(mesh_.element_count() * nloc_), 0.0);
}

double ElementField::value_in(int e, const std::array<double, 3> &l) const { return local_value(degree_, local(e), l); }

ElementField ElementField::combine(double a, const ElementField &x, double b, const ElementField &y) {
  if (!x.mesh_.same_object(y.mesh_) && !(x.mesh_ == y.mesh_))
    throw InvalidArgument("element fields live on different meshes");
  if (x.degree_ != y.degree_)
    throw InvalidArgument("element fields have different degrees");
  ElementField out(x.mesh_, x.degree_);
  for (std::size_t i = 0; i < out.values_.size(); ++i)
    out.values_[i] = a * x.values_[i] + b * y.values_[i];
  return out;
}

ElementField ElementField::on_overlay(const Overlay &ov, int k) const {
  if (ov.identity(k))
    return *this;
  ElementField out(ov.common(), degree_);
  for (int e = 0; e < ov.common().element_count(); ++e) {
    const int c = ov.container(k, e);
    auto dst = out.local(e);
    for (int i = 0; i < nloc_; ++i) {
      const auto l = degree_ == 0 ? std::array<double, 3>{1.0 / 3, 1.0 / 3, 1.0 / 3} : lagrange::node_barycentric(degree_, i);
      dst[static_cast<std::size_t>(i)] = value_in(c, ov.map(k, e, l));
    }
  }
  return out;
}

EdgeField::EdgeField(Triangulation mesh) : mesh_(std::move(mesh)) {
  values_.assign(static_cast<std::size_t>(mesh_.edge_count()), {0.0, 0.0});
}

EdgeField EdgeField::combine(double a, const EdgeField &x, double b, const EdgeField &y) {
  if (x.values_.size() != y.values_.size() || !(x.mesh_ == y.mesh_))
    throw InvalidArgument("edge fields live on different meshes");
  EdgeField out(x.mesh_);
  for (std::size_t i = 0; i < out.values_.size(); ++i)
    for (int q = 0; q < 2; ++q)
      out.values_[i][static_cast<std::size_t>(q)] =
          a * x.values_[i][static_cast<std::size_t>(q)] + b * y.values_[i][static_cast<std::size_t>(q)];
  return out;
}

std::array<double, 2> EdgeField::gauss_parameters() {
  const double d = 0.5 / std::sqrt(3.0);
  return {0.5 - d, 0.5 + d};
}

std::vector<double> strong_operator(const FeFunction &v, const CoefficientMatrix &a) {
  const FeSpace &space = v.space();
  const Triangulation &m = space.mesh();
  std::vector<double> out(static_cast<std::size_t>(m.element_count()), 0.0);
  if (space.degree() == 1)
    return out;
  std::array<double, lagrange::kMaxLocalDofs> c{};
  for (int e = 0; e < m.element_count(); ++e) {
    const auto &g = m.grad_lambda(e);
    v.local(e, c);
    double trace = 0.0; // A : Hess(v)
    for (int i = 0; i < 3; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const auto sj = static_cast<std::size_t>((i + 1) % 3);
      const auto sk = static_cast<std::size_t>((i + 2) % 3);
      trace += c[si] * 4.0 * dot(g[si], a.apply(g[si]));
      trace += c[3 + si] * 8.0 * dot(g[sj], a.apply(g[sk]));
    }
    out[static_cast<std::size_t>(e)] = -trace;
  }
  return out;
}

ElementField inner_residual(const FeFunction &v, const FeFunction &av, const CoefficientMatrix &a) {
  if (!(v.space() == av.space()))
    throw InvalidArgument("inner residual needs both functions in one space");
  const auto strong = strong_operator(v, a);
  const Triangulation &m = v.space().mesh();
  ElementField r(m, v.space().degree());
  std::array<double, lagrange::kMaxLocalDofs> c{};
  for (int e = 0; e < m.element_count(); ++e) {
    av.local(e, c);
    auto dst = r.local(e);
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = strong[static_cast<std::size_t>(e)] - c[i];
  }
  return r;
}

EdgeField jump_on_overlay(const Overlay &ov, const std::vector<OverlayTerm> &terms, const CoefficientMatrix &a) {
  const Triangulation &c = ov.common();
  EdgeField out(c);
  const auto gp = EdgeField::gauss_parameters();
  for (int i = 0; i < c.edge_count(); ++i) {
    const MeshEdge &me = c.edge(i);
    if (me.boundary)
      continue;
    const Point x0 = c.vertex(me.v0), x1 = c.vertex(me.v1);
    const Vec2 nu = c.edge_normal(i);
    for (int q = 0; q < 2; ++q) {
      const Point x = x0 + gp[static_cast<std::size_t>(q)] * (x1 - x0);
      double jump = 0.0;
      for (int side = 0; side < 2; ++side) {
        const int e = me.elements[static_cast<std::size_t>(side)];
        const auto &ev = c.element_vertices(e);
        const auto l = barycentric(x, c.vertex(ev[0]), c.vertex(ev[1]), c.vertex(ev[2]));
        Vec2 flux{};
        for (const auto &term : terms) {
          const int ce = ov.container(term.mesh, e);
          flux = flux + term.weight * term.function->gradient_in(ce, ov.map(term.mesh, e, l));
        }
        jump += (side == 0 ? 1.0 : -1.0) * dot(a.apply(flux), nu);
      }
      out[i][static_cast<std::size_t>(q)] = jump;
    }
  }
  return out;
}

EdgeField jump_residual(const FeFunction &v, const CoefficientMatrix &a) {
  const Triangulation &c = v.space().mesh();
  EdgeField out(c);
  const auto gp = EdgeField::gauss_parameters();
  for (int i = 0; i < c.edge_count(); ++i) {
    const MeshEdge &me = c.edge(i);
    if (me.boundary)
      continue;
    const Point x0 = c.vertex(me.v0), x1 = c.vertex(me.v1);
    const Vec2 nu = c.edge_normal(i);
    for (int q = 0; q < 2; ++q) {
      const Point x = x0 + gp[static_cast<std::size_t>(q)] * (x1 - x0);
      double jump = 0.0;
      for (int side = 0; side < 2; ++side) {
        const int e = me.elements[static_cast<std::size_t>(side)];
        const auto &ev = c.element_vertices(e);
        const auto l = barycentric(x, c.vertex(ev[0]), c.vertex(ev[1]), c.vertex(ev[2]));
        jump += (side == 0 ? 1.0 : -1.0) * dot(a.apply(v.gradient_in(e, l)), nu);
      }
      out[i][static_cast<std::size_t>(q)] = jump;
    }
  }
  return out;
}

std::vector<double> edge_meshsize(const Triangulation &t) {
  std::vector<double> h(static_cast<std::size_t>(t.edge_count()), 0.0);
  for (int i = 0; i < t.edge_count(); ++i)
    for (int e : t.edge(i).elements)
      if (e >= 0)
        h[static_cast<std::size_t>(i)] = std::max(h[static_cast<std::size_t>(i)], t.diameter(e));
  return h;
}

namespace {

// h^(2p) without pow() for the half-integer exponents used by the estimators.
double weight_power(double h, double p) {
  const double twice = 2.0 * p;
  if (twice == std::floor(twice) && twice >= 0.0 && twice <= 8.0) {
    double w = 1.0;
    for (int k = 0; k < static_cast<int>(twice); ++k)
      w *= h;
    return w;
  }
  return std::pow(h, twice);
}

} // namespace

double weighted_norm(const ElementField &r, double p, std::span<const double> h) {
  const Triangulation &m = r.mesh();
  if (h.size() != static_cast<std::size_t>(m.element_count()))
    throw InvalidArgument("meshsize does not match the element field");
  const Eigen::MatrixXd &ref = reference_mass(r.degree());
  const int n = r.local_count();
  double sum = 0.0;
  for (int e = 0; e < m.element_count(); ++e) {
    const auto c = r.local(e);
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j)
        row += ref(i, j) * c[static_cast<std::size_t>(j)];
      q += c[static_cast<std::size_t>(i)] * row;
    }
    const double he = h[static_cast<std::size_t>(e)];
    sum += weight_power(he, p) * m.area(e) * q;
  }
  return std::sqrt(std::max(sum, 0.0));
}

double weighted_norm(const EdgeField &j, double p, std::span<const double> h_edge, const std::vector<char> *mask) {
  const Triangulation &m = j.mesh();
  if (h_edge.size() != j.size())
    throw InvalidArgument("edge meshsize does not match the edge field");
  double sum = 0.0;
  for (int i = 0; i < m.edge_count(); ++i) {
    if (mask && !(*mask)[static_cast<std::size_t>(i)])
      continue;
    const auto &v = j[i];
    const double q = 0.5 * (v[0] * v[0] + v[1] * v[1]) * m.edge_length(i);
    sum += weight_power(h_edge[static_cast<std::size_t>(i)], p) * q;
  }
  return std::sqrt(sum);
}

} // namespace parabest
