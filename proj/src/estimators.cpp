#include "parabest/estimators.hpp"

#include "parabest/errors.hpp"
#include "parabest/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace parabest {

double ConstantsTable::get(int k, int j) const {
  if (k < 1)
    throw InvalidArgument("constant index must be positive");
  if (auto it = values_.find({k, j}); it != values_.end())
    return it->second;
  const auto basic = [&](int p) {
    const auto it = values_.find({p, j});
    return it == values_.end() ? 1.0 : it->second;
  };
  double product = 1.0;
  int rest = k;
  for (int p = 2; p * p <= rest; ++p)
    while (rest % p == 0) {
      product *= basic(p);
      rest /= p;
    }
  if (rest > 1 && rest != k)
    product *= basic(rest);
  return product;
}

void ConstantsTable::set(int k, int j, double value) {
  if (k < 1 || !(value > 0.0))
    throw InvalidArgument("constants must have a positive index and a positive value");
  values_[{k, j}] = value;
}

namespace {

double rec_from_fields(const ElementField &r, const EdgeField &j, std::span<const double> h,
                       std::span<const double> he, RecKind kind, const ConstantsTable &c, double alpha) {
  if (kind == RecKind::inf)
    return c.get(6, 2) * weighted_norm(r, 2.0, h) + c.get(10, 2) * weighted_norm(j, 1.5, he);
  return c.get(3, 1) / alpha * weighted_norm(r, 1.0, h) + c.get(5, 1) / alpha * weighted_norm(j, 0.5, he);
}

SpaceEstimate space_same_mesh(const TimeSlabState &prev, const TimeSlabState &cur, std::span<const double> h,
                              std::span<const double> he, const ConstantsTable &c) {
  const double inv = 1.0 / cur.tau;
  const ElementField dr = ElementField::combine(inv, cur.inner_residual, -inv, prev.inner_residual);
  const EdgeField dj = EdgeField::combine(inv, cur.jump_residual, -inv, prev.jump_residual);
  SpaceEstimate out;
  out.common = c.get(10, 2) * weighted_norm(dj, 1.5, he);
  out.total = c.get(6, 2) * weighted_norm(dr, 2.0, h) + out.common;
  return out;
}

// (P^n - I)(f^n + U^{n-1}/tau_n) at a point, through the pointwise form:
// fBar - f(t_n) + (U^n - U^{n-1})/tau_n - dBarU.
struct DefectTerm {
  const TimeSlabState *cur;
  const FeFunction *prev_u;
  int mesh_cur;
  int mesh_prev;
};

double defect_at(const Overlay &ov, const DefectTerm &d, const SpaceTimeFunction &f, int e,
                 const std::array<double, 3> &l, const Point &x) {
  const int ec = ov.container(d.mesh_cur, e);
  const auto lc = ov.map(d.mesh_cur, e, l);
  const int ep = ov.container(d.mesh_prev, e);
  const auto lp = ov.map(d.mesh_prev, e, l);
  const TimeSlabState &s = *d.cur;
  return s.fBar.value_in(ec, lc) - f(x, s.t) + (s.U.value_in(ec, lc) - d.prev_u->value_in(ep, lp)) / s.tau -
         s.dBarU.value_in(ec, lc);
}

} // namespace

double eta_rec_low(const TimeSlabState &s, RecKind kind, const ConstantsTable &c, double alpha) {
  const Triangulation &m = s.space.mesh();
  const auto h = meshsize(m);
  const auto he = edge_meshsize(m);
  return rec_from_fields(s.inner_residual, s.jump_residual, h, he, kind, c, alpha);
}

SpaceEstimate eta_space_low(const TimeSlabState &prev, const TimeSlabState &cur, const ConstantsTable &c,
                            const CoefficientMatrix &a) {
  const Triangulation &mp = prev.space.mesh();
  const Triangulation &mc = cur.space.mesh();
  if (!mp.compatible_with(mc))
    throw IncompatibleMeshes("space estimator across incompatible meshes");
  if (mp == mc) {
    const auto h = meshsize(mc);
    const auto he = edge_meshsize(mc);
    return space_same_mesh(prev, cur, h, he, c);
  }
  const Overlay ov({mp, mc});
  const Triangulation &cm = ov.common();
  const double inv = 1.0 / cur.tau;
  const ElementField dr = ElementField::combine(inv, cur.inner_residual.on_overlay(ov, 1), -inv,
                                                prev.inner_residual.on_overlay(ov, 0));
  const EdgeField dj = jump_on_overlay(ov, {{1, inv, &cur.U}, {0, -inv, &prev.U}}, a);
  std::vector<double> hh(static_cast<std::size_t>(cm.element_count()));
  for (int e = 0; e < cm.element_count(); ++e)
    hh[static_cast<std::size_t>(e)] = ov.hat_h(e);
  std::vector<double> hhe(static_cast<std::size_t>(cm.edge_count()), 0.0);
  std::vector<char> common(hhe.size(), 0), changed(hhe.size(), 0);
  for (int i = 0; i < cm.edge_count(); ++i) {
    const MeshEdge &me = cm.edge(i);
    if (me.boundary)
      continue;
    const auto si = static_cast<std::size_t>(i);
    hhe[si] = std::max(ov.hat_h(me.elements[0]), ov.hat_h(me.elements[1]));
    const bool both = ov.on_skeleton(0, i) && ov.on_skeleton(1, i);
    common[si] = both ? 1 : 0;
    changed[si] = both ? 0 : 1;
  }
  SpaceEstimate out;
  out.common = c.get(10, 2) * weighted_norm(dj, 1.5, hhe, &common);
  out.changed = c.get(14, 2) * weighted_norm(dj, 1.5, hhe, &changed);
  out.total = c.get(6, 2) * weighted_norm(dr, 2.0, hh) + out.common + out.changed;
  return out;
}

double gamma_low(const TimeSlabState &prev, const TimeSlabState &cur, const SpaceTimeFunction &f,
                 const ConstantsTable &c, double alpha, int exactness) {
  const Overlay ov({prev.space.mesh(), cur.space.mesh()});
  const Triangulation &cm = ov.common();
  const auto &q = quad_rule_triangle(exactness);
  const DefectTerm d{&cur, &prev.U, 1, 0};
  double sum = 0.0;
  for (int e = 0; e < cm.element_count(); ++e) {
    const auto &v = cm.element_vertices(e);
    const Point p0 = cm.vertex(v[0]), p1 = cm.vertex(v[1]), p2 = cm.vertex(v[2]);
    const double h = cur.space.mesh().diameter(ov.container(1, e));
    const double area = cm.area(e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const Point x = p0 + s * (p1 - p0) + t * (p2 - p0);
      const double val = defect_at(ov, d, f, e, {1.0 - s - t, s, t}, x);
      sum += 2.0 * area * q.weights[k] * h * h * val * val;
    }
  }
  return c.get(3, 1) / std::sqrt(alpha) * std::sqrt(sum);
}

double gamma_one(const TimeSlabState &prev2, const TimeSlabState &prev, const TimeSlabState &cur,
                 const SpaceTimeFunction &f, const ConstantsTable &c, double alpha, int exactness) {
  const Overlay ov({prev2.space.mesh(), prev.space.mesh(), cur.space.mesh()});
  const Triangulation &cm = ov.common();
  const auto &q = quad_rule_triangle(exactness);
  const DefectTerm dn{&cur, &prev.U, 2, 1};
  const DefectTerm dp{&prev, &prev2.U, 1, 0};
  double sum = 0.0;
  for (int e = 0; e < cm.element_count(); ++e) {
    const auto &v = cm.element_vertices(e);
    const Point p0 = cm.vertex(v[0]), p1 = cm.vertex(v[1]), p2 = cm.vertex(v[2]);
    const double h = std::max(cur.space.mesh().diameter(ov.container(2, e)),
                              prev.space.mesh().diameter(ov.container(1, e)));
    const double area = cm.area(e);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto [s, t] = q.points[k];
      const std::array<double, 3> l{1.0 - s - t, s, t};
      const Point x = p0 + s * (p1 - p0) + t * (p2 - p0);
      const double val = (defect_at(ov, dn, f, e, l, x) - defect_at(ov, dp, f, e, l, x)) / cur.tau;
      sum += 2.0 * area * q.weights[k] * h * h * val * val;
    }
  }
  return c.get(3, 1) / std::sqrt(alpha) * std::sqrt(sum);
}

namespace {

struct TimeRule {
  std::vector<double> x, w; // on [0, 1], weights sum to 1
};

TimeRule time_rule(int points) {
  TimeRule r;
  gauss_legendre(points, r.x, r.w);
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= 0.5;
  }
  return r;
}

} // namespace

double eta_f(const FeSpace &space, const SpaceTimeFunction &f, double t0, double t1, int power, int time_points,
             int exactness) {
  if (power != 1 && power != 2)
    throw InvalidArgument("eta_f power must be 1 or 2");
  const TimeRule tr = time_rule(time_points);
  const auto &q = quad_rule_triangle(exactness);
  const Triangulation &m = space.mesh();
  double acc = 0.0;
  for (std::size_t i = 0; i < tr.x.size(); ++i) {
    const double t = t0 + tr.x[i] * (t1 - t0);
    double sq = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
      const auto &v = m.element_vertices(e);
      const Point p0 = m.vertex(v[0]), p1 = m.vertex(v[1]), p2 = m.vertex(v[2]);
      const double area = m.area(e);
      for (std::size_t k = 0; k < q.size(); ++k) {
        const auto [s, tt] = q.points[k];
        const Point x = p0 + s * (p1 - p0) + tt * (p2 - p0);
        const double d = f(x, t1) - f(x, t);
        sq += 2.0 * area * q.weights[k] * d * d;
      }
    }
    acc += tr.w[i] * (power == 1 ? std::sqrt(sq) : sq);
  }
  return power == 1 ? acc : std::sqrt(acc);
}

double theta_low(const TimeSlabState &prev, const TimeSlabState &cur) {
  return 0.5 * l2_norm_of_combination({{1.0, &cur.AnUn}, {-1.0, &prev.AnUn}});
}

EstimatorSuite::EstimatorSuite(const BackwardEuler &stepper, ConstantsTable constants, EstimatorOptions options)
    : stepper_(stepper), constants_(std::move(constants)), options_(options),
      alpha_(constants_.alpha.value_or(stepper.data().a.alpha())) {
  if (!(alpha_ > 0.0))
    throw InvalidArgument("ellipticity constant must be positive");
}

EstimatorRecord EstimatorSuite::initial(const TimeSlabState &s0) const {
  const auto ops = stepper_.operators(s0.space);
  EstimatorRecord r;
  r.n = s0.n;
  r.t = s0.t;
  r.lowEtaRecInf = rec_from_fields(s0.inner_residual, s0.jump_residual, ops->h(), ops->h_edge(), RecKind::inf,
                                   constants_, alpha_);
  r.lowEtaRec2 = rec_from_fields(s0.inner_residual, s0.jump_residual, ops->h(), ops->h_edge(), RecKind::two,
                                 constants_, alpha_);
  r.highEtaRecInf = r.lowEtaRec2;
  return r;
}

EstimatorRecord EstimatorSuite::record(const TimeSlabState *prev2, const TimeSlabState &prev,
                                       const TimeSlabState &cur) const {
  const auto ops = stepper_.operators(cur.space);
  const SpaceTimeFunction &f = stepper_.data().f;
  const bool same = prev.space == cur.space;
  const bool fast = options_.fast_paths && same;
  const bool fast_data = fast && ops->separable();
  const double c31 = constants_.get(3, 1) / std::sqrt(alpha_);

  EstimatorRecord r;
  r.n = cur.n;
  r.t = cur.t;
  r.tau = cur.tau;
  r.mesh_changed = !(prev.space.mesh() == cur.space.mesh());

  r.lowEtaRecInf = rec_from_fields(cur.inner_residual, cur.jump_residual, ops->h(), ops->h_edge(), RecKind::inf,
                                   constants_, alpha_);
  r.lowEtaRec2 = rec_from_fields(cur.inner_residual, cur.jump_residual, ops->h(), ops->h_edge(), RecKind::two,
                                 constants_, alpha_);

  const SpaceEstimate space = fast ? space_same_mesh(prev, cur, ops->h(), ops->h_edge(), constants_)
                                   : eta_space_low(prev, cur, constants_, stepper_.data().a);
  r.lowSpace = space.total;
  r.lowSpaceChanged = space.changed;

  if (fast) {
    const Eigen::VectorXd d = cur.AnUn.free_part() - prev.AnUn.free_part();
    r.lowTheta = 0.5 * std::sqrt(std::max(0.0, d.dot(ops->mass() * d)));
  } else {
    r.lowTheta = theta_low(prev, cur);
  }

  if (f.is_zero() && same) {
    r.lowGamma2 = 0.0;
  } else if (fast_data) {
    const auto s = f.coefficients(cur.t);
    const Eigen::Map<const Eigen::VectorXd> sv(s.data(), static_cast<Eigen::Index>(s.size()));
    r.lowGamma2 = c31 * std::sqrt(std::max(0.0, sv.dot(ops->defect_gram() * sv)));
  } else {
    r.lowGamma2 = gamma_low(prev, cur, f, constants_, alpha_, options_.exactness);
  }

  if (cur.n >= 2 && prev2) {
    const bool same2 = prev2->space == prev.space;
    if (f.is_zero() && same && same2) {
      r.highGamma1 = 0.0;
    } else if (fast_data && same2) {
      const auto s1 = f.coefficients(cur.t);
      const auto s0 = f.coefficients(prev.t);
      Eigen::VectorXd dv(static_cast<Eigen::Index>(s1.size()));
      for (std::size_t k = 0; k < s1.size(); ++k)
        dv[static_cast<Eigen::Index>(k)] = (s1[k] - s0[k]) / cur.tau;
      r.highGamma1 = c31 * std::sqrt(std::max(0.0, dv.dot(ops->defect_gram() * dv)));
    } else {
      r.highGamma1 = gamma_one(*prev2, prev, cur, f, constants_, alpha_, options_.exactness);
    }
  }

  if (f.is_zero()) {
    r.lowEtaF = r.highEtaF2 = 0.0;
  } else if (options_.fast_paths && ops->separable()) {
    const TimeRule tr = time_rule(options_.time_points);
    const auto sn = f.coefficients(cur.t);
    double acc1 = 0.0, acc2 = 0.0;
    Eigen::VectorXd dv(static_cast<Eigen::Index>(sn.size()));
    for (std::size_t i = 0; i < tr.x.size(); ++i) {
      const auto st = f.coefficients(prev.t + tr.x[i] * cur.tau);
      for (std::size_t k = 0; k < sn.size(); ++k)
        dv[static_cast<Eigen::Index>(k)] = sn[k] - st[k];
      const double sq = std::max(0.0, dv.dot(ops->data_gram() * dv));
      acc1 += tr.w[i] * std::sqrt(sq);
      acc2 += tr.w[i] * sq;
    }
    r.lowEtaF = acc1;
    r.highEtaF2 = std::sqrt(acc2);
  } else {
    r.lowEtaF = eta_f(cur.space, f, prev.t, cur.t, 1, options_.time_points, options_.exactness);
    r.highEtaF2 = eta_f(cur.space, f, prev.t, cur.t, 2, options_.time_points, options_.exactness);
  }

  r.highEtaRecInf = r.lowEtaRec2;
  r.highEtaRec2 = r.lowSpace;
  r.highSpace = r.lowSpace;
  r.highGammaInf = r.lowGamma2;
  r.highTheta2 = 2.0 / std::sqrt(3.0) * r.lowTheta;
  return r;
}

BoundAccumulator::BoundAccumulator(double init_low, double init_high) {
  totals_.init_low = init_low;
  totals_.init_high = init_high;
  finish();
}

void BoundAccumulator::add(const EstimatorRecord &r) {
  auto &t = totals_;
  if (r.n == 0) {
    have_initial_ = true;
    t.eta_rec_inf_max = std::max(t.eta_rec_inf_max, r.lowEtaRecInf);
    t.high_rec_max = std::max(t.high_rec_max, r.highEtaRecInf);
    prev_eta2_ = r.lowEtaRec2;
    finish();
    return;
  }
  const double tau = r.tau;
  t.eta_rec_inf_max = std::max(t.eta_rec_inf_max, r.lowEtaRecInf);
  if (r.n == 1)
    rec2_with0_sq_ += prev_eta2_ * prev_eta2_ * tau;
  s33_ += (r.lowEtaRec2 * r.lowEtaRec2 + prev_eta2_ * prev_eta2_) * tau;
  prev_eta2_ = r.lowEtaRec2;
  rec2_sq_ += r.lowEtaRec2 * r.lowEtaRec2 * tau;
  rec2_with0_sq_ += r.lowEtaRec2 * r.lowEtaRec2 * tau;
  e1_low_ += (r.lowTheta + r.lowEtaF + r.lowSpace) * tau;
  gamma2_sq_ += r.lowGamma2 * r.lowGamma2 * tau;
  t.eta_space_acc += r.lowSpace * tau;
  t.theta1_acc += r.lowTheta * tau;
  t.etaf1_acc += r.lowEtaF * tau;

  gamma_inf_max_ = std::max(gamma_inf_max_, r.highGammaInf);
  if (r.n >= 2)
    gamma1_acc_ += r.highGamma1 * tau;
  e2_high_sq_ += (r.highTheta2 * r.highTheta2 + r.highEtaF2 * r.highEtaF2 + r.highSpace * r.highSpace) * tau;
  t.high_rec_max = std::max(t.high_rec_max, r.highEtaRecInf);
  high_rec2_sq_ += r.highEtaRec2 * r.highEtaRec2 * tau;
  finish();
}

void BoundAccumulator::finish() {
  auto &t = totals_;
  t.eta_rec_2_acc = std::sqrt(rec2_sq_);
  t.gamma2_acc = std::sqrt(gamma2_sq_);
  t.E1_low = e1_low_;
  t.E2_low = std::sqrt(gamma2_sq_);
  const double low_tail = 4.0 * std::hypot(t.E1_low, t.E2_low);
  t.total_32 = t.init_low + t.eta_rec_inf_max + low_tail;
  t.total_33 = t.init_low + std::sqrt(s33_) + low_tail;
  t.E1_high = 2.0 * gamma_inf_max_ + gamma1_acc_;
  t.E2_high = std::sqrt(e2_high_sq_);
  t.high_rec_2 = std::sqrt(high_rec2_sq_);
  const double high_tail = 4.0 * std::hypot(t.E1_high, t.E2_high);
  t.high_total_H1L2 = t.init_high + high_tail + t.high_rec_2;
  t.high_total_LinfH1 = t.init_high + high_tail + t.high_rec_max;
  t.est_LinfL2 = t.eta_rec_inf_max + t.eta_space_acc + t.theta1_acc;
  t.est_L2H1 = std::sqrt(rec2_with0_sq_) + t.eta_space_acc + t.theta1_acc;
}

double BoundAccumulator::total(Family f) const {
  switch (f) {
  case Family::low32:
    return totals_.total_32;
  case Family::low33:
    return totals_.total_33;
  case Family::high:
    return totals_.high_total_H1L2;
  }
  return 0.0;
}

BoundTotals totals(const std::vector<EstimatorRecord> &records, std::size_t m, double init_low, double init_high) {
  BoundAccumulator acc(init_low, init_high);
  for (std::size_t i = 0; i <= m && i < records.size(); ++i)
    acc.add(records[i]);
  return acc.totals();
}

} // namespace parabest
