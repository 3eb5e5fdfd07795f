#pragma once

#include <array>
#include <cmath>

namespace parabest {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point &, const Point &) = default;
};

using Vec2 = Point;

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Barycentric coordinates of p in the triangle (a, b, c).
inline std::array<double, 3> barycentric(Point p, Point a, Point b, Point c) {
  const double det = cross(b - a, c - a);
  const double l1 = cross(p - a, c - a) / det;
  const double l2 = cross(b - a, p - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

} // namespace parabest
