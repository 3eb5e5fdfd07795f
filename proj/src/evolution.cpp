#include "parabest/evolution.hpp"

#include "parabest/errors.hpp"
#include "parabest/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace parabest {

SpaceOperators::SpaceOperators(const FeSpace &space, const ProblemData &data, int exactness)
    : space_(space), mass_full_(mass_matrix(space, DofSet::all)),
      stiffness_full_(stiffness_matrix(space, data.a, DofSet::all)),
      stiffness_(restrict_to_free(space, stiffness_full_)), mass_free_(restrict_to_free(space, mass_full_)),
      h_(meshsize(space.mesh())), h_edge_(edge_meshsize(space.mesh())) {
  if (!data.f.separable() || data.f.is_zero())
    return;
  const auto &terms = data.f.terms();
  const std::size_t nt = terms.size();
  for (const auto &term : terms) {
    loads_.push_back(load_vector(space, term.space, DofSet::free, exactness));
    projections_.push_back(mass_free_.solve(loads_.back()));
  }
  std::vector<FeFunction> proj;
  for (const auto &p : projections_)
    proj.push_back(FeFunction::from_free(space, p));
  defect_gram_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nt));
  data_gram_ = defect_gram_;
  const auto &q = quad_rule_triangle(exactness);
  const Triangulation &m = space.mesh();
  Eigen::VectorXd d(static_cast<Eigen::Index>(nt)), g(static_cast<Eigen::Index>(nt));
  for (int e = 0; e < m.element_count(); ++e) {
    const auto &v = m.element_vertices(e);
    const Point p0 = m.vertex(v[0]), p1 = m.vertex(v[1]), p2 = m.vertex(v[2]);
    const double area = m.area(e);
    const double h2 = h_[static_cast<std::size_t>(e)] * h_[static_cast<std::size_t>(e)];
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const Point x = p0 + s * (p1 - p0) + t * (p2 - p0);
      const double w = 2.0 * area * q.weights[k];
      for (std::size_t j = 0; j < nt; ++j) {
        g[static_cast<Eigen::Index>(j)] = terms[j].space(x);
        d[static_cast<Eigen::Index>(j)] = proj[j].value_in(e, {1.0 - s - t, s, t}) - g[static_cast<Eigen::Index>(j)];
      }
      defect_gram_.noalias() += (w * h2) * d * d.transpose();
      data_gram_.noalias() += w * g * g.transpose();
    }
  }
}

const SpdSolver &SpaceOperators::step_solver(double tau) const {
  std::lock_guard lock(step_mutex_);
  auto it = step_solvers_.find(tau);
  if (it == step_solvers_.end()) {
    SparseMatrix m = mass_free_.matrix() + tau * stiffness_;
    it = step_solvers_.emplace(tau, std::make_shared<SpdSolver>(std::move(m))).first;
  }
  return *it->second;
}

BackwardEuler::BackwardEuler(ProblemData data, StepOptions options)
    : data_(std::move(data)), options_(options) {
  if (!(data_.final_time > 0.0))
    throw InvalidArgument("final time must be positive");
}

std::shared_ptr<const SpaceOperators> BackwardEuler::operators(const FeSpace &space) const {
  std::lock_guard lock(cache_mutex_);
  for (auto it = cache_.begin(); it != cache_.end(); ++it) {
    if ((*it)->space() == space) {
      cache_.splice(cache_.begin(), cache_, it);
      return cache_.front();
    }
  }
  cache_.push_front(std::make_shared<const SpaceOperators>(space, data_, options_.exactness));
  while (cache_.size() > 4)
    cache_.pop_back();
  return cache_.front();
}

void BackwardEuler::fill_residuals(TimeSlabState &s) const {
  s.inner_residual = inner_residual(s.U, s.AnUn, data_.a);
  s.jump_residual = jump_residual(s.U, data_.a);
}

TimeSlabState BackwardEuler::initial_state(const FeSpace &space) const {
  TimeSlabState s;
  s.space = space;
  s.U = interpolate(space, data_.initial);
  const auto ops = operators(space);
  s.AnUn = FeFunction::from_free(space, ops->mass_solver().solve(ops->stiffness() * s.U.free_part()));
  s.fBar = FeFunction(space);
  s.dBarU = FeFunction(space);
  fill_residuals(s);
  return s;
}

TimeSlabState BackwardEuler::step(const TimeSlabState &prev, const FeSpace &space, double tau) const {
  if (!(tau >= options_.min_tau_fraction * data_.final_time))
    throw InvalidArgument("time step is degenerate or non-positive");
  if (!space.mesh().compatible_with(prev.space.mesh()))
    throw IncompatibleMeshes("new space is not compatible with the previous mesh");
  const auto ops = operators(space);
  TimeSlabState s;
  s.n = prev.n + 1;
  s.t_prev = prev.t;
  s.t = prev.t + tau;
  s.tau = tau;
  s.space = space;

  Eigen::VectorXd mass_prev, proj_prev;
  if (prev.space == space) {
    proj_prev = prev.U.free_part();
    mass_prev = ops->mass() * proj_prev;
  } else {
    mass_prev = mixed_mass(space, prev.U, DofSet::free);
    proj_prev = ops->mass_solver().solve(mass_prev);
  }

  Eigen::VectorXd load, fbar;
  if (ops->separable()) {
    const auto coeff = data_.f.coefficients(s.t);
    load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.free_dofs().size()));
    fbar = load;
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      load += coeff[k] * ops->loads()[k];
      fbar += coeff[k] * ops->projections()[k];
    }
  } else {
    load = load_vector(space, data_.f.at(s.t), DofSet::free, options_.exactness);
    fbar = ops->mass_solver().solve(load);
  }

  const Eigen::VectorXd u = ops->step_solver(tau).solve(tau * load + mass_prev);
  const Eigen::VectorXd dbar = (u - proj_prev) / tau;
  const Eigen::VectorXd anun = fbar - dbar;
  s.U = FeFunction::from_free(space, u);
  s.fBar = FeFunction::from_free(space, fbar);
  s.dBarU = FeFunction::from_free(space, dbar);
  s.AnUn = FeFunction::from_free(space, anun);

  if (options_.verify) {
    const Eigen::VectorXd indep = ops->mass_solver().solve(ops->stiffness() * u);
    const auto mnorm = [&](const Eigen::VectorXd &v) { return std::sqrt(std::max(0.0, v.dot(ops->mass() * v))); };
    const double scale = mnorm(indep) + mnorm(fbar);
    s.pointwise_defect = scale > 0.0 ? mnorm(dbar + indep - fbar) / scale : 0.0;
    const double an = mnorm(indep);
    s.elliptic_agreement = an > 0.0 ? mnorm(anun - indep) / an : mnorm(anun);
  }
  fill_residuals(s);
  return s;
}

FeFunction l2_project(const FeSpace &target, const FeFunction &v) {
  if (v.space() == target)
    return FeFunction(target, v.coefficients());
  const Eigen::VectorXd b = mixed_mass(target, v, DofSet::free);
  return FeFunction::from_free(target, solve_spd(mass_matrix(target), b));
}

FeFunction l2_project(const FeSpace &target, const ScalarFunction &v, int exactness) {
  const Eigen::VectorXd b = load_vector(target, v, DofSet::free, exactness);
  return FeFunction::from_free(target, solve_spd(mass_matrix(target), b));
}

FeFunction discrete_elliptic(const FeSpace &space, const FeFunction &v, const CoefficientMatrix &a) {
  Eigen::VectorXd b;
  if (v.space() == space)
    b = stiffness_matrix(space, a) * v.free_part();
  else
    b = mixed_stiffness(space, v, a, DofSet::free);
  return FeFunction::from_free(space, solve_spd(mass_matrix(space), b));
}

namespace {

void write_vector(std::ostream &os, const char *name, const Eigen::VectorXd &v) {
  os << "vector " << name << ' ' << v.size() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    os << buf << "\n";
  }
}

Eigen::VectorXd read_vector(std::istream &is, const std::string &name, Eigen::Index expected) {
  std::string word, got;
  Eigen::Index n = 0;
  if (!(is >> word >> got >> n) || word != "vector" || got != name || n != expected)
    throw ParseError("checkpoint: expected vector '" + name + "'");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(is >> v[i]))
      throw ParseError("checkpoint: truncated vector '" + name + "'");
  return v;
}

} // namespace

void write_state(std::ostream &os, const TimeSlabState &s) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "step %d %.17g %.17g %.17g\n", s.n, s.t_prev, s.t, s.tau);
  os << "parabest-state 1\n" << buf;
  write_function(os, s.U);
  write_vector(os, "fBar", s.fBar.coefficients());
  write_vector(os, "dBarU", s.dBarU.coefficients());
  write_vector(os, "AnUn", s.AnUn.coefficients());
}

TimeSlabState read_state(std::istream &is, const CoefficientMatrix &a) {
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "parabest-state" || version != 1)
    throw ParseError("not a parabest checkpoint");
  TimeSlabState s;
  if (!(is >> word >> s.n >> s.t_prev >> s.t >> s.tau) || word != "step")
    throw ParseError("checkpoint: malformed step line");
  s.U = read_function(is);
  s.space = s.U.space();
  const auto n = static_cast<Eigen::Index>(s.space.dof_count());
  s.fBar = FeFunction(s.space, read_vector(is, "fBar", n));
  s.dBarU = FeFunction(s.space, read_vector(is, "dBarU", n));
  s.AnUn = FeFunction(s.space, read_vector(is, "AnUn", n));
  s.inner_residual = inner_residual(s.U, s.AnUn, a);
  s.jump_residual = jump_residual(s.U, a);
  return s;
}

} // namespace parabest
