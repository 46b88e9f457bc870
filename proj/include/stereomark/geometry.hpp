#pragma once

#include <array>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace stereomark {

using Point2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Quad = std::array<Point2, 4>;

// Signed area that is positive when the polygon runs counterclockwise as
// displayed on screen (image Y axis pointing down). This is the negated
// textbook shoelace value in raw pixel coordinates.
inline double ccw_area(std::span<const Point2> poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return -0.5 * twice;
}

// True when every turn has the same (counterclockwise-on-screen) sense.
inline bool is_convex_ccw(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = poly[(i + 1) % n] - poly[i];
    const Point2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    // Negated 2D cross product: screen-space counterclockwise turns are > 0.
    if (-(e0.x() * e1.y() - e0.y() * e1.x()) <= 0.0) return false;
  }
  return true;
}

}  // namespace stereomark
