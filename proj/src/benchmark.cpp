#include "parabest/benchmark.hpp"

#include "parabest/errors.hpp"
#include "parabest/overlay.hpp"
#include "parabest/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace parabest {

ProblemKind parse_problem(const std::string &name) {
  if (name == "slow")
    return ProblemKind::slow;
  if (name == "fast")
    return ProblemKind::fast;
  throw InvalidArgument("unknown problem '" + name + "' (expected slow or fast)");
}

std::string to_string(ProblemKind p) { return p == ProblemKind::slow ? "slow" : "fast"; }

ProblemData BenchmarkProblem::data() const {
  ProblemData d;
  d.a = a;
  d.f = f;
  const SpaceTimeFunction exact = u;
  d.initial = [exact](const Point &x) { return exact(x, 0.0); };
  d.final_time = final_time;
  return d;
}

BenchmarkProblem make_benchmark(ProblemKind kind) {
  using std::numbers::pi;
  const auto g = [](const Point &x) { return std::exp(-10.0 * (x.x * x.x + x.y * x.y)); };
  const auto grad_g = [g](const Point &x) { return -20.0 * g(x) * Point{x.x, x.y}; };
  const auto lap = [g](const Point &x) {
    const double r2 = x.x * x.x + x.y * x.y;
    return (40.0 - 400.0 * r2) * g(x);
  };
  const auto grad_lap = [g](const Point &x) {
    const double r2 = x.x * x.x + x.y * x.y;
    return (8000.0 * r2 - 1600.0) * g(x) * Point{x.x, x.y};
  };

  TimeFunction s, ds, dds;
  if (kind == ProblemKind::slow) {
    s = [](double t) { return std::sin(pi * t); };
    ds = [](double t) { return pi * std::cos(pi * t); };
    dds = [](double t) { return -pi * pi * std::sin(pi * t); };
  } else {
    s = [](double t) { return 0.1 * std::sin(20.0 * pi * t); };
    ds = [](double t) { return 2.0 * pi * std::cos(20.0 * pi * t); };
    dds = [](double t) { return -40.0 * pi * pi * std::sin(20.0 * pi * t); };
  }

  BenchmarkProblem p;
  p.kind = kind;
  p.u = SpaceTimeFunction({SeparableTerm{s, ds, g, grad_g}});
  p.f = SpaceTimeFunction({SeparableTerm{ds, dds, g, grad_g}, SeparableTerm{s, ds, lap, grad_lap}});
  p.a = CoefficientMatrix::identity();
  p.final_time = 1.0;
  return p;
}

// ---------------------------------------------------------------------------
// Errors

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index ix(std::size_t i) { return static_cast<Index>(i); }

// Gauss points of [t0, t1] and weights summing to t1 - t0.
void gauss_in(int n, double t0, double t1, std::vector<double> &t, std::vector<double> &w) {
  std::vector<double> x, wr;
  gauss_legendre(n, x, wr);
  t.resize(x.size());
  w.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    t[i] = t0 + 0.5 * (x[i] + 1.0) * (t1 - t0);
    w[i] = 0.5 * (t1 - t0) * wr[i];
  }
}

double quad_form(const SparseMatrix &m, const VectorXd &v) { return v.dot(m * v); }

} // namespace

// Full-space L2 projections c_k of the spatial factors of u, their defects
// d_k = g_k - c_k and the Gram data needed to evaluate the error norms of
// U - sum s_k g_k from coefficient vectors alone.
struct ErrorAccumulator::Cache {
  FeSpace space;
  SparseMatrix mass, stiff_i, stiff_a;
  std::vector<VectorXd> proj, cross_i, cross_a;
  MatrixXd d_l2, d_i, d_a;
};

ErrorAccumulator::ErrorAccumulator(SpaceTimeFunction u, CoefficientMatrix a, ErrorOptions options)
    : u_(std::move(u)), a_(a), options_(options) {}
ErrorAccumulator::~ErrorAccumulator() = default;
ErrorAccumulator::ErrorAccumulator(ErrorAccumulator &&) noexcept = default;
ErrorAccumulator &ErrorAccumulator::operator=(ErrorAccumulator &&) noexcept = default;

const ErrorAccumulator::Cache &ErrorAccumulator::cache_for(const FeSpace &space) {
  if (cache_ && cache_->space == space)
    return *cache_;
  auto c = std::make_unique<Cache>();
  c->space = space;
  c->mass = mass_matrix(space, DofSet::all);
  c->stiff_i = stiffness_matrix(space, CoefficientMatrix::identity(), DofSet::all);
  c->stiff_a = a_.is_identity() ? c->stiff_i : stiffness_matrix(space, a_, DofSet::all);

  const auto &terms = u_.terms();
  const std::size_t nt = terms.size();
  const SpdSolver solver(c->mass);
  for (const auto &term : terms)
    c->proj.push_back(solver.solve(load_vector(space, term.space, DofSet::all, options_.exactness)));

  const auto n = static_cast<Index>(space.dof_count());
  std::vector<VectorXd> bi(nt, VectorXd::Zero(n)), ba(nt, VectorXd::Zero(n));
  c->d_l2 = MatrixXd::Zero(ix(nt), ix(nt));
  c->d_i = c->d_l2;
  c->d_a = c->d_l2;

  const Triangulation &m = space.mesh();
  const auto &q = quad_rule_triangle(options_.exactness);
  const int nloc = space.local_dof_count();
  std::array<Vec2, lagrange::kMaxLocalDofs> grads{};
  VectorXd d(ix(nt));
  std::vector<Vec2> gd(nt), agd(nt);
  for (int e = 0; e < m.element_count(); ++e) {
    const auto &v = m.element_vertices(e);
    const Point p0 = m.vertex(v[0]), p1 = m.vertex(v[1]), p2 = m.vertex(v[2]);
    const double area = m.area(e);
    const auto dofs = space.element_dofs(e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const std::array<double, 3> l{1.0 - s - t, s, t};
      const Point x = p0 + s * (p1 - p0) + t * (p2 - p0);
      const double w = 2.0 * area * q.weights[k];
      lagrange::gradients(space.degree(), l, m.grad_lambda(e), grads);
      for (std::size_t j = 0; j < nt; ++j) {
        const Vec2 gg = terms[j].space_gradient(x);
        Vec2 pg{};
        double pv = 0.0;
        std::array<double, lagrange::kMaxLocalDofs> vals{};
        lagrange::values(space.degree(), l, vals);
        for (int i = 0; i < nloc; ++i) {
          const double cj = c->proj[j][dofs[static_cast<std::size_t>(i)]];
          pv += cj * vals[static_cast<std::size_t>(i)];
          pg = pg + cj * grads[static_cast<std::size_t>(i)];
        }
        d[ix(j)] = terms[j].space(x) - pv;
        gd[j] = gg - pg;
        agd[j] = a_.apply(gd[j]);
        const Vec2 agg = a_.apply(gg);
        for (int i = 0; i < nloc; ++i) {
          const Vec2 gi = grads[static_cast<std::size_t>(i)];
          bi[j][dofs[static_cast<std::size_t>(i)]] += w * dot(gi, gg);
          ba[j][dofs[static_cast<std::size_t>(i)]] += w * dot(gi, agg);
        }
      }
      c->d_l2.noalias() += w * d * d.transpose();
      for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t jj = 0; jj < nt; ++jj) {
          c->d_i(ix(j), ix(jj)) += w * dot(gd[j], gd[jj]);
          c->d_a(ix(j), ix(jj)) += w * dot(agd[j], gd[jj]);
        }
    }
  }
  for (std::size_t j = 0; j < nt; ++j) {
    c->cross_i.push_back(bi[j] - c->stiff_i * c->proj[j]);
    c->cross_a.push_back(ba[j] - c->stiff_a * c->proj[j]);
  }
  cache_ = std::move(c);
  return *cache_;
}

ErrorAccumulator::Sample ErrorAccumulator::single(const FeFunction &U, double t) const {
  const FeSpace &space = U.space();
  const Triangulation &m = space.mesh();
  const auto &q = quad_rule_triangle(options_.exactness);
  const bool grad = u_.has_gradient();
  Sample out;
  for (int e = 0; e < m.element_count(); ++e) {
    const auto &v = m.element_vertices(e);
    const Point p0 = m.vertex(v[0]), p1 = m.vertex(v[1]), p2 = m.vertex(v[2]);
    const double area = m.area(e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, r] = q.points[k];
      const std::array<double, 3> l{1.0 - s - r, s, r};
      const Point x = p0 + s * (p1 - p0) + r * (p2 - p0);
      const double w = 2.0 * area * q.weights[k];
      const double ev = U.value_in(e, l) - u_(x, t);
      out.l2sq += w * ev * ev;
      if (grad) {
        const Vec2 ge = U.gradient_in(e, l) - u_.gradient(x, t);
        out.gradsq += w * dot(ge, ge);
        out.energysq += w * dot(a_.apply(ge), ge);
      }
    }
  }
  return out;
}

std::vector<ErrorAccumulator::Sample> ErrorAccumulator::samples_generic(const TimeSlabState &prev,
                                                                        const TimeSlabState &cur,
                                                                        const std::vector<double> &times,
                                                                        const std::vector<double> &dt_times,
                                                                        std::vector<double> &dt_sq) const {
  const Overlay ov({prev.space.mesh(), cur.space.mesh()});
  const Triangulation &common = ov.common();
  const auto &q = quad_rule_triangle(options_.exactness);
  const bool grad = u_.has_gradient();
  if (!dt_times.empty() && !u_.has_time_derivative())
    throw InvalidArgument("exact solution has no time derivative");
  std::vector<Sample> out(times.size());
  dt_sq.assign(dt_times.size(), 0.0);
  const double tau = cur.t - prev.t;
  for (int e = 0; e < common.element_count(); ++e) {
    const auto &v = common.element_vertices(e);
    const Point p0 = common.vertex(v[0]), p1 = common.vertex(v[1]), p2 = common.vertex(v[2]);
    const double area = common.area(e);
    const int e0 = ov.container(0, e), e1 = ov.container(1, e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, r] = q.points[k];
      const std::array<double, 3> l{1.0 - s - r, s, r};
      const auto l0 = ov.map(0, e, l), l1 = ov.map(1, e, l);
      const Point x = p0 + s * (p1 - p0) + r * (p2 - p0);
      const double w = 2.0 * area * q.weights[k];
      const double up = prev.U.value_in(e0, l0), uc = cur.U.value_in(e1, l1);
      Vec2 gp{}, gc{};
      if (grad) {
        gp = prev.U.gradient_in(e0, l0);
        gc = cur.U.gradient_in(e1, l1);
      }
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double b = tau > 0.0 ? (times[i] - prev.t) / tau : 1.0;
        const double a = 1.0 - b;
        const double ev = a * up + b * uc - u_(x, times[i]);
        out[i].l2sq += w * ev * ev;
        if (grad) {
          const Vec2 ge = a * gp + b * gc - u_.gradient(x, times[i]);
          out[i].gradsq += w * dot(ge, ge);
          out[i].energysq += w * dot(a_.apply(ge), ge);
        }
      }
      for (std::size_t i = 0; i < dt_times.size(); ++i) {
        const double ev = (uc - up) / tau - u_.time_derivative(x, dt_times[i]);
        dt_sq[i] += w * ev * ev;
      }
    }
  }
  return out;
}

std::vector<ErrorAccumulator::Sample> ErrorAccumulator::samples(const TimeSlabState &prev, const TimeSlabState &cur,
                                                                const std::vector<double> &times,
                                                                const std::vector<double> &dt_times,
                                                                std::vector<double> &dt_sq) {
  const bool fast = options_.fast_paths && u_.separable() && !u_.is_zero() && u_.has_gradient() &&
                    u_.has_time_derivative() && prev.space == cur.space;
  if (!fast)
    return samples_generic(prev, cur, times, dt_times, dt_sq);

  const Cache &c = cache_for(cur.space);
  const std::size_t nt = c.proj.size();
  const double tau = cur.t - prev.t;
  const VectorXd &Up = prev.U.coefficients(), &Uc = cur.U.coefficients();
  std::vector<Sample> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double b = (times[i] - prev.t) / tau, a = 1.0 - b;
    const auto sv = u_.coefficients(times[i]);
    VectorXd w = a * Up + b * Uc;
    VectorXd s(ix(nt));
    for (std::size_t k = 0; k < nt; ++k) {
      w -= sv[k] * c.proj[k];
      s[ix(k)] = sv[k];
    }
    double xi = 0.0, xa = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
      xi += sv[k] * w.dot(c.cross_i[k]);
      xa += sv[k] * w.dot(c.cross_a[k]);
    }
    out[i].l2sq = std::max(0.0, quad_form(c.mass, w) + s.dot(c.d_l2 * s));
    out[i].gradsq = std::max(0.0, quad_form(c.stiff_i, w) - 2.0 * xi + s.dot(c.d_i * s));
    out[i].energysq = std::max(0.0, quad_form(c.stiff_a, w) - 2.0 * xa + s.dot(c.d_a * s));
  }
  dt_sq.assign(dt_times.size(), 0.0);
  const VectorXd du = (Uc - Up) / tau;
  for (std::size_t i = 0; i < dt_times.size(); ++i) {
    const auto sv = u_.derivative_coefficients(dt_times[i]);
    VectorXd w = du;
    VectorXd s(ix(nt));
    for (std::size_t k = 0; k < nt; ++k) {
      w -= sv[k] * c.proj[k];
      s[ix(k)] = sv[k];
    }
    dt_sq[i] = std::max(0.0, quad_form(c.mass, w) + s.dot(c.d_l2 * s));
  }
  return out;
}

void ErrorAccumulator::initial(const TimeSlabState &s0) {
  const Sample e = single(s0.U, s0.t);
  values_ = ErrorValues{};
  l2h1_sq_ = h1l2_sq_ = nodal_sq_ = 0.0;
  values_.LinfL2 = std::sqrt(e.l2sq);
  values_.LinfH1 = std::sqrt(e.energysq);
}

void ErrorAccumulator::add(const TimeSlabState &prev, const TimeSlabState &cur) {
  const double tau = cur.t - prev.t;
  if (!(tau > 0.0))
    throw InvalidArgument("error accumulation needs increasing times");
  std::vector<double> tg, wg, td, wd;
  gauss_in(2, prev.t, cur.t, tg, wg);
  gauss_in(3, prev.t, cur.t, td, wd);
  std::vector<double> times{cur.t, 0.5 * (prev.t + cur.t)};
  times.insert(times.end(), tg.begin(), tg.end());
  std::vector<double> dt_sq;
  const auto s = samples(prev, cur, times, td, dt_sq);

  for (std::size_t i = 0; i < 2; ++i) {
    values_.LinfL2 = std::max(values_.LinfL2, std::sqrt(s[i].l2sq));
    values_.LinfH1 = std::max(values_.LinfH1, std::sqrt(s[i].energysq));
  }
  for (std::size_t i = 0; i < tg.size(); ++i)
    l2h1_sq_ += wg[i] * (s[2 + i].l2sq + s[2 + i].gradsq);
  for (std::size_t i = 0; i < td.size(); ++i)
    h1l2_sq_ += wd[i] * dt_sq[i];
  nodal_sq_ += tau * (s[0].l2sq + s[0].gradsq);
  values_.L2H1 = std::sqrt(l2h1_sq_);
  values_.H1L2 = std::sqrt(h1l2_sq_);
  values_.L2H1_nodal = std::sqrt(nodal_sq_);
}

double ErrorAccumulator::l2_error(const FeFunction &U, double t) const { return std::sqrt(single(U, t).l2sq); }

ErrorValues compute_errors(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u,
                           const CoefficientMatrix &a, std::size_t m, ErrorOptions options) {
  if (states.empty() || m >= states.size())
    throw InvalidArgument("compute_errors: need states 0..m");
  ErrorAccumulator acc(u, a, options);
  acc.initial(states[0]);
  for (std::size_t n = 1; n <= m; ++n)
    acc.add(states[n - 1], states[n]);
  return acc.values();
}

double error_LinfL2(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u, std::size_t m) {
  return compute_errors(states, u, CoefficientMatrix::identity(), m).LinfL2;
}

double error_L2H1(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u, std::size_t m) {
  return compute_errors(states, u, CoefficientMatrix::identity(), m).L2H1;
}

std::pair<double, double> error_high(const std::vector<TimeSlabState> &states, const SpaceTimeFunction &u,
                                     const CoefficientMatrix &a, std::size_t m) {
  const auto v = compute_errors(states, u, a, m);
  return {v.LinfH1, v.H1L2};
}

std::vector<double> eoc(const std::vector<double> &values, const std::vector<double> &hs) {
  if (values.size() != hs.size())
    throw InvalidArgument("eoc: values and meshsizes differ in length");
  std::vector<double> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0))
      throw InvalidArgument("eoc: values must be positive");
    if (i > 0) {
      if (!(hs[i] < hs[i - 1]) || !(hs[i] > 0.0))
        throw InvalidArgument("eoc: meshsizes must be positive and strictly decreasing");
      out.push_back(std::log(values[i] / values[i - 1]) / std::log(hs[i] / hs[i - 1]));
    }
  }
  return out;
}

double effectivity(const ErrorValues &errors, const BoundTotals &totals, NormKind norm) {
  const double num = norm == NormKind::LinfL2 ? errors.LinfL2 : errors.L2H1_nodal;
  const double den = norm == NormKind::LinfL2 ? totals.est_LinfL2 : totals.est_L2H1;
  if (!(den > 0.0))
    throw InvalidArgument("effectivity: estimator total is zero");
  return num / den;
}

// ---------------------------------------------------------------------------
// Presets and runs

RunPreset preset(const std::string &name) {
  if (name == "1")
    return {"1", ProblemKind::slow, 1, 2, 0.5, 0.04, 6};
  if (name == "2")
    return {"2", ProblemKind::fast, 1, 1, 0.25, 0.01, 5};
  if (name == "3a")
    return {"3a", ProblemKind::slow, 1, 3, 0.125, 0.08, 4};
  if (name == "3b" || name == "3")
    return {"3b", ProblemKind::slow, 2, 3, 0.125, 0.08, 4};
  if (name == "4")
    return {"4", ProblemKind::fast, 2, 2, 0.125, 0.02, 4};
  throw InvalidArgument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"1", "2", "3a", "3b", "4"}; }

MeshSchedule parse_schedule(std::istream &is) {
  MeshSchedule out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    MeshChange c;
    std::string kind;
    if (!(ls >> c.step))
      continue;
    const std::string where = "schedule line " + std::to_string(lineno);
    if (!(ls >> kind))
      throw ParseError(where + ": missing action");
    if (c.step < 1)
      throw ParseError(where + ": step must be >= 1");
    if (kind == "base") {
      c.reset = true;
    } else if (kind == "refine") {
      if (!(ls >> c.lo.x >> c.lo.y >> c.hi.x >> c.hi.y))
        throw ParseError(where + ": refine needs x0 y0 x1 y1");
      if (!(ls >> c.times))
        c.times = 1;
      if (c.times < 1)
        throw ParseError(where + ": bisection count must be >= 1");
    } else {
      throw ParseError(where + ": unknown action '" + kind + "'");
    }
    std::string extra;
    if (ls >> extra)
      throw ParseError(where + ": trailing input '" + extra + "'");
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(), [](const MeshChange &a, const MeshChange &b) { return a.step < b.step; });
  return out;
}

Triangulation apply_mesh_change(const Triangulation &base, const MeshChange &c) {
  if (c.reset)
    return base;
  Triangulation t = base;
  for (int r = 0; r < c.times; ++r) {
    std::vector<int> marked;
    for (int e = 0; e < t.element_count(); ++e) {
      const auto &v = t.element_vertices(e);
      const Point p0 = t.vertex(v[0]), p1 = t.vertex(v[1]), p2 = t.vertex(v[2]);
      const Point m{(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
      if (m.x >= c.lo.x && m.x <= c.hi.x && m.y >= c.lo.y && m.y <= c.hi.y)
        marked.push_back(e);
    }
    if (marked.empty())
      break;
    t = bisect_marked(t, marked);
  }
  return t;
}

const std::vector<double> &RunReport::eoc_of(const std::string &name) const {
  for (const auto &[key, series] : eocs)
    if (key == name)
      return series;
  throw InvalidArgument("no EOC series named '" + name + "'");
}

double run_meshsize(const RunPreset &p, int i) {
  if (i < 1)
    throw InvalidArgument("run index starts at 1");
  return p.h1 / std::ldexp(1.0, i - 1);
}

double run_timestep(const RunPreset &p, int i, double final_time) {
  const double c0 = p.tau1 / std::pow(p.h1, p.k);
  const double tau = c0 * std::pow(run_meshsize(p, i), p.k);
  const double steps = std::ceil(final_time / tau - 1e-9);
  return final_time / steps;
}

namespace {

void validate(const RunPreset &p) {
  if (p.degree != 1 && p.degree != 2)
    throw UnsupportedDegree("degree must be 1 or 2");
  if (p.k < 1)
    throw InvalidArgument("coupling exponent k must be >= 1");
  if (!(p.h1 > 0.0) || !(p.tau1 > 0.0))
    throw InvalidArgument("h1 and tau1 must be positive");
  if (p.runs < 1)
    throw InvalidArgument("number of runs must be >= 1");
  const double cells = 2.0 / p.h1;
  if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
    throw InvalidArgument("h1 must divide the side length 2 of the domain");
}

} // namespace

RunResult run_single(const RunConfig &config, int i) {
  const RunPreset &p = config.preset;
  validate(p);
  const auto start = std::chrono::steady_clock::now();
  const BenchmarkProblem problem = make_benchmark(p.problem);
  const BackwardEuler stepper(problem.data(), StepOptions{config.exactness, config.verify});
  const EstimatorSuite suite(stepper, config.constants,
                             EstimatorOptions{config.time_points, config.exactness, config.fast_paths});
  ErrorAccumulator errors(problem.u, problem.a, ErrorOptions{config.exactness, config.fast_paths});

  RunResult res;
  res.run = i;
  res.h = run_meshsize(p, i);
  res.tau = run_timestep(p, i, problem.final_time);
  const int steps = static_cast<int>(std::lround(problem.final_time / res.tau));
  res.steps = steps;

  const int cells = static_cast<int>(std::lround(2.0 / p.h1));
  const Triangulation base = uniform_refine(build_macro_square(cells), i - 1);
  const FeSpace base_space = build_space(base, p.degree);
  res.elements = base.element_count();
  res.dofs = base_space.dof_count();

  std::size_t next_change = 0;
  FeSpace space = base_space;
  TimeSlabState prev = stepper.initial_state(space);
  errors.initial(prev);
  const EstimatorRecord r0 = suite.initial(prev);
  const double e0 = errors.values().LinfL2, e0a = errors.values().LinfH1;
  BoundAccumulator acc(r0.lowEtaRecInf + e0, r0.lowEtaRec2 + e0a);
  acc.add(r0);

  std::optional<TimeSlabState> prev2;
  res.min_eff_LinfL2 = res.min_eff_L2H1 = std::numeric_limits<double>::infinity();
  res.min_bound_ratio_32 = res.min_bound_ratio_33 = std::numeric_limits<double>::infinity();
  res.rows.reserve(static_cast<std::size_t>(steps));

  for (int n = 1; n <= steps; ++n) {
    while (next_change < config.schedule.size() && config.schedule[next_change].step <= n) {
      space = build_space(apply_mesh_change(base, config.schedule[next_change]), p.degree);
      ++next_change;
    }
    TimeSlabState cur = stepper.step(prev, space, res.tau);
    const EstimatorRecord rec = suite.record(prev2 ? &*prev2 : nullptr, prev, cur);
    acc.add(rec);
    errors.add(prev, cur);

    if (config.verify) {
      res.max_pointwise_defect = std::max(res.max_pointwise_defect, cur.pointwise_defect);
      res.max_elliptic_agreement = std::max(res.max_elliptic_agreement, cur.elliptic_agreement);
    }
    res.max_changed_space = std::max(res.max_changed_space, rec.lowSpaceChanged);
    res.elements = std::max(res.elements, cur.space.mesh().element_count());
    res.dofs = std::max(res.dofs, cur.space.dof_count());

    RunRow row;
    row.run = i;
    row.n = n;
    row.t = cur.t;
    row.h = res.h;
    row.tau = res.tau;
    row.err = errors.values();
    row.est = acc.totals();
    row.rec = rec;
    row.eff_LinfL2 = effectivity(row.err, row.est, NormKind::LinfL2);
    row.eff_L2H1 = effectivity(row.err, row.est, NormKind::L2H1);
    if (n >= 2) {
      res.min_eff_LinfL2 = std::min(res.min_eff_LinfL2, row.eff_LinfL2);
      res.max_eff_LinfL2 = std::max(res.max_eff_LinfL2, row.eff_LinfL2);
      res.min_eff_L2H1 = std::min(res.min_eff_L2H1, row.eff_L2H1);
      res.max_eff_L2H1 = std::max(res.max_eff_L2H1, row.eff_L2H1);
    }
    if (row.err.LinfL2 > 0.0)
      res.min_bound_ratio_32 = std::min(res.min_bound_ratio_32, row.est.total_32 / row.err.LinfL2);
    if (row.err.L2H1 > 0.0)
      res.min_bound_ratio_33 = std::min(res.min_bound_ratio_33, row.est.total_33 / row.err.L2H1);
    res.rows.push_back(std::move(row));

    prev2 = std::move(prev);
    prev = std::move(cur);
  }
  if (steps < 2)
    res.min_eff_LinfL2 = res.min_eff_L2H1 = 0.0;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

namespace {

struct Column {
  const char *name;
  double (*get)(const RunRow &);
};

const std::vector<Column> &value_columns() {
  static const std::vector<Column> cols{
      {"err_LinfL2", [](const RunRow &r) { return r.err.LinfL2; }},
      {"err_L2H1", [](const RunRow &r) { return r.err.L2H1; }},
      {"err_LinfH1", [](const RunRow &r) { return r.err.LinfH1; }},
      {"err_H1L2", [](const RunRow &r) { return r.err.H1L2; }},
      {"eta_rec_inf_max", [](const RunRow &r) { return r.est.eta_rec_inf_max; }},
      {"eta_rec_2_acc", [](const RunRow &r) { return r.est.eta_rec_2_acc; }},
      {"eta_space_acc", [](const RunRow &r) { return r.est.eta_space_acc; }},
      {"theta1_acc", [](const RunRow &r) { return r.est.theta1_acc; }},
      {"etaf1_acc", [](const RunRow &r) { return r.est.etaf1_acc; }},
      {"gamma2_acc", [](const RunRow &r) { return r.est.gamma2_acc; }},
      {"total_32", [](const RunRow &r) { return r.est.total_32; }},
      {"total_33", [](const RunRow &r) { return r.est.total_33; }},
      {"high_total_H1L2", [](const RunRow &r) { return r.est.high_total_H1L2; }},
      {"high_total_LinfH1", [](const RunRow &r) { return r.est.high_total_LinfH1; }},
      {"eff_LinfL2", [](const RunRow &r) { return r.eff_LinfL2; }},
      {"eff_L2H1", [](const RunRow &r) { return r.eff_L2H1; }},
      {"est_LinfL2", [](const RunRow &r) { return r.est.est_LinfL2; }},
      {"est_L2H1", [](const RunRow &r) { return r.est.est_L2H1; }},
      {"err_L2H1_nodal", [](const RunRow &r) { return r.err.L2H1_nodal; }},
  };
  return cols;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

} // namespace

RunReport run_preset(const RunConfig &config, int jobs) {
  validate(config.preset);
  RunReport report;
  report.config = config;
  const int runs = config.preset.runs;
  report.runs.resize(static_cast<std::size_t>(runs));
  const int workers = std::clamp(jobs, 1, runs);
  if (workers == 1) {
    for (int i = 1; i <= runs; ++i)
      report.runs[static_cast<std::size_t>(i - 1)] = run_single(config, i);
  } else {
    std::atomic<int> next{1};
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(runs));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i <= runs; i = next++) {
          try {
            report.runs[static_cast<std::size_t>(i - 1)] = run_single(config, i);
          } catch (...) {
            failures[static_cast<std::size_t>(i - 1)] = std::current_exception();
          }
        }
      });
    }
    for (auto &t : pool)
      t.join();
    for (const auto &f : failures)
      if (f)
        std::rethrow_exception(f);
  }

  std::vector<double> hs, taus;
  for (const auto &r : report.runs) {
    hs.push_back(r.h);
    taus.push_back(r.tau);
  }
  const auto series = [&](const std::vector<double> &values, const std::vector<double> &scale) {
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v))
        return std::vector<double>(values.size() - 1, std::numeric_limits<double>::quiet_NaN());
    return eoc(values, scale);
  };
  for (const auto &col : value_columns()) {
    std::vector<double> values;
    for (const auto &r : report.runs)
      values.push_back(col.get(r.final_row()));
    report.eocs.emplace_back(col.name, series(values, hs));
    if (std::string(col.name) == "etaf1_acc")
      report.eocs.emplace_back("etaf1_acc_tau", series(values, taus));
  }
  return report;
}

const std::vector<std::string> &csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"run", "i", "n", "t", "h", "tau"};
    for (const auto &v : value_columns())
      c.emplace_back(v.name);
    return c;
  }();
  return cols;
}

void write_rows_csv(std::ostream &os, const RunReport &report) {
  const auto &cols = csv_columns();
  for (std::size_t j = 0; j < cols.size(); ++j)
    os << (j ? "," : "") << cols[j];
  os << "\n";
  for (const auto &run : report.runs)
    for (const auto &row : run.rows) {
      os << report.config.preset.name << ',' << row.run << ',' << row.n << ',' << fmt(row.t) << ',' << fmt(row.h)
         << ',' << fmt(row.tau);
      for (const auto &col : value_columns())
        os << ',' << fmt(col.get(row));
      os << "\n";
    }
}

void write_summary_csv(std::ostream &os, const RunReport &report) {
  os << "run,i,h,tau,steps,elements,dofs";
  for (const auto &col : value_columns())
    os << ',' << col.name;
  os << ",max_pointwise_defect,max_elliptic_agreement,min_eff_LinfL2,max_eff_LinfL2,min_eff_L2H1,max_eff_L2H1,"
        "max_changed_space,min_bound_ratio_32,min_bound_ratio_33";
  for (const auto &[name, s] : report.eocs)
    os << ",eoc_" << name;
  os << "\n";
  for (std::size_t k = 0; k < report.runs.size(); ++k) {
    const auto &r = report.runs[k];
    const RunRow last = r.final_row();
    os << report.config.preset.name << ',' << r.run << ',' << fmt(r.h) << ',' << fmt(r.tau) << ',' << r.steps << ','
       << r.elements << ',' << r.dofs;
    for (const auto &col : value_columns())
      os << ',' << fmt(col.get(last));
    for (double v : {r.max_pointwise_defect, r.max_elliptic_agreement, r.min_eff_LinfL2, r.max_eff_LinfL2,
                     r.min_eff_L2H1, r.max_eff_L2H1, r.max_changed_space, r.min_bound_ratio_32,
                     r.min_bound_ratio_33})
      os << ',' << fmt(v);
    for (const auto &[name, s] : report.eocs) {
      os << ',';
      if (k > 0 && std::isfinite(s[k - 1]))
        os << fmt(s[k - 1]);
    }
    os << "\n";
  }
}

std::string plot_script(const RunReport &report, const std::string &rows_csv, const std::string &summary_csv) {
  std::ostringstream s;
  s << R"PY(#!/usr/bin/env python3
# Convergence figure: estimators (row 1) and their EOCs (row 2), errors with
# the effectivity denominators (row 3), error EOCs and effectivity (row 4).
import csv
import math
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
)PY";
  s << "ROWS = os.path.join(HERE, \"" << rows_csv << "\")\n";
  s << "SUMMARY = os.path.join(HERE, \"" << summary_csv << "\")\n";
  s << "TITLE = \"preset " << report.config.preset.name << " (" << to_string(report.config.preset.problem)
    << ", P" << report.config.preset.degree << ", k=" << report.config.preset.k << ")\"\n";
  s << R"PY(

def load(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


rows = load(ROWS)
runs = {}
for r in rows:
    runs.setdefault(int(r["i"]), []).append(r)
ids = sorted(runs)


def series(i, key):
    return [float(r["t"]) for r in runs[i]], [float(r[key]) for r in runs[i]]


def eoc_series(i, key):
    # EOC between runs i-1 and i at the time nodes of the coarser run.
    tc, vc = series(i - 1, key)
    tf, vf = series(i, key)
    hc, hf = float(runs[i - 1][0]["h"]), float(runs[i][0]["h"])
    out_t, out_v = [], []
    j = 0
    for t, v in zip(tc, vc):
        while j + 1 < len(tf) and tf[j] < t - 1e-12:
            j += 1
        w = vf[j]
        if v > 0 and w > 0:
            out_t.append(t)
            out_v.append(math.log(w / v) / math.log(hf / hc))
    return out_t, out_v


layout = [
    ["eta_rec_inf_max", "eta_rec_2_acc", "eta_space_acc", "theta1_acc"],
    ["eta_rec_inf_max", "eta_rec_2_acc", "eta_space_acc", "theta1_acc"],
    ["err_LinfL2", "err_L2H1", "est_LinfL2", "est_L2H1"],
    ["err_LinfL2", "err_L2H1", "eff_LinfL2", "eff_L2H1"],
]
fig, axes = plt.subplots(4, 4, figsize=(16, 14))
for row, keys in enumerate(layout):
    for col, key in enumerate(keys):
        ax = axes[row][col]
        eoc_row = row == 1 or (row == 3 and col < 2)
        for i in ids:
            if eoc_row:
                if i == ids[0]:
                    continue
                t, v = eoc_series(i, key)
                ax.plot(t, v, label="EOC %d/%d" % (i - 1, i))
            else:
                t, v = series(i, key)
                ax.plot(t, v, label="run %d" % i)
                if not key.startswith("eff"):
                    ax.set_yscale("log")
        ax.set_title(("EOC " if eoc_row else "") + key, fontsize=9)
        ax.set_xlabel("t", fontsize=8)
        ax.legend(fontsize=6)
fig.suptitle(TITLE)
fig.tight_layout()
out = os.path.splitext(os.path.abspath(__file__))[0] + ".png"
fig.savefig(out, dpi=120)
if "--summary" in sys.argv:
    for r in load(SUMMARY):
        print(r["i"], r["err_LinfL2"], r.get("eoc_err_LinfL2", ""))
)PY";
  return s.str();
}

} // namespace parabest
