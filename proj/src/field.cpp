#include "parabest/field.hpp"

#include "parabest/errors.hpp"

#include <memory>

namespace parabest {

SpaceTimeFunction::SpaceTimeFunction(Value value, Gradient gradient, Value time_derivative)
    : value_(std::move(value)), gradient_(std::move(gradient)), dt_(std::move(time_derivative)) {
  if (!value_)
    throw InvalidArgument("space-time function without a value callback");
}

SpaceTimeFunction::SpaceTimeFunction(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {
  for (const auto &t : terms_)
    if (!t.time || !t.space)
      throw InvalidArgument("separable term needs time and space factors");
  auto shared = std::make_shared<const std::vector<SeparableTerm>>(terms_);
  value_ = [shared](const Point &x, double t) {
    double v = 0.0;
    for (const auto &term : *shared)
      v += term.time(t) * term.space(x);
    return v;
  };
  bool grad = true, dt = true;
  for (const auto &t : terms_) {
    grad = grad && static_cast<bool>(t.space_gradient);
    dt = dt && static_cast<bool>(t.time_derivative);
  }
  if (grad) {
    gradient_ = [shared](const Point &x, double t) {
      Vec2 g{};
      for (const auto &term : *shared)
        g = g + term.time(t) * term.space_gradient(x);
      return g;
    };
  }
  if (dt) {
    dt_ = [shared](const Point &x, double t) {
      double v = 0.0;
      for (const auto &term : *shared)
        v += term.time_derivative(t) * term.space(x);
      return v;
    };
  }
}

SpaceTimeFunction SpaceTimeFunction::zero() {
  SpaceTimeFunction f([](const Point &, double) { return 0.0; }, [](const Point &, double) { return Vec2{}; },
                      [](const Point &, double) { return 0.0; });
  f.is_zero_ = true;
  return f;
}

Vec2 SpaceTimeFunction::gradient(const Point &x, double t) const {
  if (!gradient_)
    throw InvalidArgument("space-time function has no gradient");
  return gradient_(x, t);
}

double SpaceTimeFunction::time_derivative(const Point &x, double t) const {
  if (!dt_)
    throw InvalidArgument("space-time function has no time derivative");
  return dt_(x, t);
}

std::vector<double> SpaceTimeFunction::coefficients(double t) const {
  std::vector<double> s;
  s.reserve(terms_.size());
  for (const auto &term : terms_)
    s.push_back(term.time(t));
  return s;
}

std::vector<double> SpaceTimeFunction::derivative_coefficients(double t) const {
  std::vector<double> s;
  s.reserve(terms_.size());
  for (const auto &term : terms_) {
    if (!term.time_derivative)
      throw InvalidArgument("separable term has no time derivative");
    s.push_back(term.time_derivative(t));
  }
  return s;
}

PointFunction SpaceTimeFunction::at(double t) const {
  return [value = value_, t](const Point &x) { return value(x, t); };
}

} // namespace parabest
