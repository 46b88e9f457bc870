#pragma once

#include <span>

#include "stereomark/geometry.hpp"

namespace stereomark {

// Planar projective map, normalised so that m(2,2) == 1 whenever
// |m(2,2)| > 1e-12.
struct Homography {
  Mat3 m = Mat3::Identity();

  Point2 apply(const Point2& p) const {
    const Vec3 q = m * Vec3(p.x(), p.y(), 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
  }
};

// Direct Linear Transform on Hartley-normalised correspondences. Exactly four
// points are expected. Throws kSingularSystem when three points of either set
// are collinear or the system is otherwise rank deficient.
Homography estimate_homography(std::span<const Point2, 4> object_pts, std::span<const Point2, 4> image_pts);

}  // namespace stereomark
