#include "parabest/fespace.hpp"

#include "parabest/errors.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace parabest {

namespace lagrange {

void values(int degree, const std::array<double, 3> &l, std::array<double, kMaxLocalDofs> &out) {
  if (degree == 1) {
    out[0] = l[0];
    out[1] = l[1];
    out[2] = l[2];
    return;
  }
  for (int i = 0; i < 3; ++i) {
    const double li = l[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = li * (2.0 * li - 1.0);
    out[static_cast<std::size_t>(3 + i)] = 4.0 * l[static_cast<std::size_t>((i + 1) % 3)] * l[static_cast<std::size_t>((i + 2) % 3)];
  }
}

void gradients(int degree, const std::array<double, 3> &l, const std::array<Vec2, 3> &g,
               std::array<Vec2, kMaxLocalDofs> &out) {
  if (degree == 1) {
    out[0] = g[0];
    out[1] = g[1];
    out[2] = g[2];
    return;
  }
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>((i + 1) % 3);
    const auto sk = static_cast<std::size_t>((i + 2) % 3);
    out[si] = (4.0 * l[si] - 1.0) * g[si];
    out[3 + si] = 4.0 * (l[sj] * g[sk] + l[sk] * g[sj]);
  }
}

std::array<double, 3> node_barycentric(int degree, int i) {
  std::array<double, 3> l{0.0, 0.0, 0.0};
  if (i < 3) {
    l[static_cast<std::size_t>(i)] = 1.0;
  } else {
    (void)degree;
    l[static_cast<std::size_t>((i - 3 + 1) % 3)] = 0.5;
    l[static_cast<std::size_t>((i - 3 + 2) % 3)] = 0.5;
  }
  return l;
}

} // namespace lagrange

struct FeSpace::Data {
  Triangulation mesh;
  int degree = 1;
  int nloc = 3;
  std::vector<int> elem_dofs;
  std::vector<Point> coords;
  std::vector<char> boundary;
  std::vector<int> free;
  std::vector<int> free_index;
};

FeSpace::FeSpace(Triangulation mesh, int degree) {
  if (degree != 1 && degree != 2)
    throw UnsupportedDegree("Lagrange degree " + std::to_string(degree) + " is not supported (use 1 or 2)");
  auto d = std::make_shared<Data>();
  d->mesh = std::move(mesh);
  d->degree = degree;
  d->nloc = lagrange::local_dofs(degree);
  const Triangulation &m = d->mesh;
  const int nv = m.vertex_count();
  const int ndofs = degree == 1 ? nv : nv + m.edge_count();
  d->coords.resize(static_cast<std::size_t>(ndofs));
  d->boundary.assign(static_cast<std::size_t>(ndofs), 0);
  for (int v = 0; v < nv; ++v) {
    d->coords[static_cast<std::size_t>(v)] = m.vertex(v);
    d->boundary[static_cast<std::size_t>(v)] = m.vertex_on_boundary(v) ? 1 : 0;
  }
  if (degree == 2) {
    for (int i = 0; i < m.edge_count(); ++i) {
      const auto &me = m.edge(i);
      d->coords[static_cast<std::size_t>(nv + i)] = midpoint(m.vertex(me.v0), m.vertex(me.v1));
      d->boundary[static_cast<std::size_t>(nv + i)] = me.boundary ? 1 : 0;
    }
  }
  d->elem_dofs.resize(static_cast<std::size_t>(m.element_count() * d->nloc));
  for (int e = 0; e < m.element_count(); ++e) {
    int *dofs = &d->elem_dofs[static_cast<std::size_t>(e * d->nloc)];
    const auto &ev = m.element_vertices(e);
    for (int i = 0; i < 3; ++i)
      dofs[i] = ev[static_cast<std::size_t>(i)];
    if (degree == 2) {
      const auto &ee = m.element_edges(e);
      for (int i = 0; i < 3; ++i)
        dofs[3 + i] = nv + ee[static_cast<std::size_t>(i)];
    }
  }
  d->free_index.assign(static_cast<std::size_t>(ndofs), -1);
  for (int i = 0; i < ndofs; ++i) {
    if (!d->boundary[static_cast<std::size_t>(i)]) {
      d->free_index[static_cast<std::size_t>(i)] = static_cast<int>(d->free.size());
      d->free.push_back(i);
    }
  }
  data_ = std::move(d);
}

const Triangulation &FeSpace::mesh() const { return data_->mesh; }
int FeSpace::degree() const { return data_->degree; }
int FeSpace::dof_count() const { return static_cast<int>(data_->coords.size()); }
std::span<const int> FeSpace::element_dofs(int e) const {
  return {data_->elem_dofs.data() + static_cast<std::ptrdiff_t>(e) * data_->nloc,
          static_cast<std::size_t>(data_->nloc)};
}
const std::vector<Point> &FeSpace::dof_coordinates() const { return data_->coords; }
bool FeSpace::is_boundary_dof(int dof) const { return data_->boundary[static_cast<std::size_t>(dof)] != 0; }
int FeSpace::boundary_dof_count() const { return dof_count() - static_cast<int>(data_->free.size()); }
const std::vector<int> &FeSpace::free_dofs() const { return data_->free; }
int FeSpace::free_index(int dof) const { return data_->free_index[static_cast<std::size_t>(dof)]; }

bool operator==(const FeSpace &a, const FeSpace &b) {
  if (a.data_ == b.data_)
    return true;
  if (!a.data_ || !b.data_)
    return false;
  return a.data_->degree == b.data_->degree && a.data_->mesh == b.data_->mesh;
}

FeSpace build_space(const Triangulation &mesh, int degree) { return FeSpace(mesh, degree); }

// ---------------------------------------------------------------------------

FeFunction::FeFunction(FeSpace space)
    : space_(std::move(space)), coefficients_(Eigen::VectorXd::Zero(space_.dof_count())) {}

FeFunction::FeFunction(FeSpace space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != space_.dof_count())
    throw InvalidArgument("coefficient vector length does not match the space");
}

void FeFunction::local(int e, std::array<double, lagrange::kMaxLocalDofs> &out) const {
  const auto dofs = space_.element_dofs(e);
  for (std::size_t i = 0; i < dofs.size(); ++i)
    out[i] = coefficients_[dofs[i]];
}

double FeFunction::value_in(int e, const std::array<double, 3> &l) const {
  std::array<double, lagrange::kMaxLocalDofs> phi{}, c{};
  lagrange::values(space_.degree(), l, phi);
  local(e, c);
  double v = 0.0;
  for (int i = 0; i < space_.local_dof_count(); ++i)
    v += c[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
  return v;
}

Vec2 FeFunction::gradient_in(int e, const std::array<double, 3> &l) const {
  std::array<Vec2, lagrange::kMaxLocalDofs> g{};
  std::array<double, lagrange::kMaxLocalDofs> c{};
  lagrange::gradients(space_.degree(), l, space_.mesh().grad_lambda(e), g);
  local(e, c);
  Vec2 v{};
  for (int i = 0; i < space_.local_dof_count(); ++i)
    v = v + c[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
  return v;
}

Eigen::VectorXd FeFunction::free_part() const {
  const auto &fd = space_.free_dofs();
  Eigen::VectorXd out(static_cast<Eigen::Index>(fd.size()));
  for (std::size_t i = 0; i < fd.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = coefficients_[fd[i]];
  return out;
}

FeFunction FeFunction::from_free(const FeSpace &space, const Eigen::VectorXd &free) {
  const auto &fd = space.free_dofs();
  if (free.size() != static_cast<Eigen::Index>(fd.size()))
    throw InvalidArgument("free coefficient vector length does not match the space");
  FeFunction f(space);
  for (std::size_t i = 0; i < fd.size(); ++i)
    f.coefficients_[fd[i]] = free[static_cast<Eigen::Index>(i)];
  return f;
}

namespace {

std::pair<int, std::array<double, 3>> locate_with_barycentric(const FeSpace &space, Point x) {
  const Triangulation &m = space.mesh();
  const int e = m.locate(x);
  if (e < 0)
    throw OutsideDomain("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") is outside the domain");
  const auto &v = m.element_vertices(e);
  return {e, barycentric(x, m.vertex(v[0]), m.vertex(v[1]), m.vertex(v[2]))};
}

/// Element of `coarse` containing element `e` of `fine` (compatible meshes).
int container(const Triangulation &fine, int e, const Triangulation &coarse) {
  const Forest &f = *fine.forest();
  for (int p = fine.node(e); p >= 0; p = f.node(p).parent) {
    const int c = coarse.element_of_node(p);
    if (c >= 0)
      return c;
  }
  return -1;
}

} // namespace

double evaluate(const FeFunction &f, Point x) {
  const auto [e, l] = locate_with_barycentric(f.space(), x);
  return f.value_in(e, l);
}

Vec2 evaluate_gradient(const FeFunction &f, Point x) {
  const auto [e, l] = locate_with_barycentric(f.space(), x);
  return f.gradient_in(e, l);
}

FeFunction interpolate(const FeSpace &space, const ScalarFunction &g) {
  FeFunction f(space);
  const auto &coords = space.dof_coordinates();
  for (int i = 0; i < space.dof_count(); ++i)
    if (!space.is_boundary_dof(i))
      f.coefficients()[i] = g(coords[static_cast<std::size_t>(i)]);
  return f;
}

bool is_subspace(const FeSpace &source, const FeSpace &target) {
  if (!source.mesh().compatible_with(target.mesh()))
    return false;
  return target.degree() >= source.degree() && refines(target.mesh(), source.mesh());
}

FeFunction transfer(const FeFunction &f, const FeSpace &target) {
  const FeSpace &source = f.space();
  if (source == target)
    return FeFunction(target, f.coefficients());
  if (!source.mesh().compatible_with(target.mesh()))
    throw IncompatibleMeshes("transfer between incompatible meshes");
  if (!is_subspace(source, target))
    throw NonNestedTransfer("target space does not contain the source space");
  const Triangulation &tm = target.mesh();
  const Triangulation &sm = source.mesh();
  FeFunction out(target);
  std::vector<char> done(static_cast<std::size_t>(target.dof_count()), 0);
  for (int e = 0; e < tm.element_count(); ++e) {
    const int c = container(tm, e, sm);
    const auto &sv = sm.element_vertices(c);
    const Point a = sm.vertex(sv[0]), b = sm.vertex(sv[1]), d = sm.vertex(sv[2]);
    const auto dofs = target.element_dofs(e);
    for (int dof : dofs) {
      if (done[static_cast<std::size_t>(dof)] || target.is_boundary_dof(dof))
        continue;
      done[static_cast<std::size_t>(dof)] = 1;
      out.coefficients()[dof] = f.value_in(c, barycentric(target.dof_coordinates()[static_cast<std::size_t>(dof)], a, b, d));
    }
  }
  return out;
}

void write_function(std::ostream &os, const FeFunction &f) {
  write_mesh(os, f.space().mesh());
  os << "space " << f.space().degree() << ' ' << f.space().dof_count() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < f.coefficients().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", f.coefficients()[i]);
    os << buf << "\n";
  }
}

FeFunction read_function(std::istream &is) {
  Triangulation mesh = read_mesh(is);
  std::string word;
  int degree = 0;
  int n = 0;
  if (!(is >> word >> degree >> n) || word != "space")
    throw ParseError("malformed space descriptor");
  FeSpace space(mesh, degree);
  if (n != space.dof_count())
    throw ParseError("dof count does not match the space");
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i)
    if (!(is >> c[i]))
      throw ParseError("missing coefficient " + std::to_string(i));
  return FeFunction(space, std::move(c));
}

} // namespace parabest
