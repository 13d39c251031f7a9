#pragma once

namespace nlc {

/// A point in R^1 or R^2. One-dimensional geometries leave `y` at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance_sq(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace nlc
