#pragma once

#include "stereomark/geometry.hpp"

namespace stereomark {

// Pinhole camera, X right / Y down / Z forward. Pixel (x, y) is centred on
// the continuous coordinate (x, y).
struct CameraIntrinsics {
  double fx = 800.0;
  double fy = 800.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  // Throws kInvalidParameter when the invariants do not hold.
  void validate() const;
  Mat3 matrix() const;
};

inline constexpr double kDefaultNearPlane = 1e-4;

// u = fx x / z + cx, v = fy y / z + cy. Throws kBehindCamera when z <= near.
Point2 project(const CameraIntrinsics& cam, const Vec3& p_cam, double near = kDefaultNearPlane);

}  // namespace stereomark
