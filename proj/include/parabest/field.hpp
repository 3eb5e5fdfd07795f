#pragma once

// Space-time data u(x, t), f(x, t). A function may additionally carry a
// separable representation sum_k s_k(t) g_k(x), which the solver and the
// error/estimator code use to precompute spatial quantities once per mesh.

#include "parabest/geometry.hpp"

#include <functional>
#include <vector>

namespace parabest {

using TimeFunction = std::function<double(double)>;
using PointFunction = std::function<double(const Point &)>;
using GradientFunction = std::function<Vec2(const Point &)>;

struct SeparableTerm {
  TimeFunction time;
  TimeFunction time_derivative;
  PointFunction space;
  GradientFunction space_gradient;
};

class SpaceTimeFunction {
public:
  using Value = std::function<double(const Point &, double)>;
  using Gradient = std::function<Vec2(const Point &, double)>;

  SpaceTimeFunction() = default;
  /// General function; the gradient and time derivative are optional and
  /// only needed where the function is used as an exact solution.
  explicit SpaceTimeFunction(Value value, Gradient gradient = {}, Value time_derivative = {});
  explicit SpaceTimeFunction(std::vector<SeparableTerm> terms);

  static SpaceTimeFunction zero();

  double operator()(const Point &x, double t) const { return value_(x, t); }
  Vec2 gradient(const Point &x, double t) const;
  double time_derivative(const Point &x, double t) const;

  bool has_gradient() const { return static_cast<bool>(gradient_); }
  bool has_time_derivative() const { return static_cast<bool>(dt_); }
  bool separable() const { return !terms_.empty() || is_zero_; }
  bool is_zero() const { return is_zero_; }
  const std::vector<SeparableTerm> &terms() const { return terms_; }

  /// Time coefficients s_k(t) (or s_k'(t)) of the separable form.
  std::vector<double> coefficients(double t) const;
  std::vector<double> derivative_coefficients(double t) const;

  /// Spatial slice x -> f(x, t).
  PointFunction at(double t) const;

private:
  Value value_;
  Gradient gradient_;
  Value dt_;
  std::vector<SeparableTerm> terms_;
  bool is_zero_ = false;
};

} // namespace parabest
