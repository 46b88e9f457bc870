#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "stereomark/camera.hpp"
#include "stereomark/config.hpp"
#include "stereomark/marker.hpp"
#include "stereomark/pose.hpp"

namespace stereomark::testing {

inline std::filesystem::path data_dir() { return STEREOMARK_DATA_DIR; }

inline MarkerDictionary sample_dictionary() { return load_dictionary(data_dir() / "dictionary.json"); }

inline CameraIntrinsics desk_camera() { return {800.0, 800.0, 320.0, 240.0, 640, 480}; }

inline Mat3 rot_x(double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitX()).toRotationMatrix();
}
inline Mat3 rot_y(double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitY()).toRotationMatrix();
}
inline Mat3 rot_z(double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3::UnitZ()).toRotationMatrix();
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Random front-facing marker pose: in-plane spin, then a tilt of `tilt_deg`
// about a random in-plane axis, at `distance` along the optical axis.
inline Pose tilted_pose(double distance, double tilt_deg, double tilt_axis_deg, double spin_deg) {
  const Vec3 axis(std::cos(tilt_axis_deg * std::numbers::pi / 180.0),
                  std::sin(tilt_axis_deg * std::numbers::pi / 180.0), 0.0);
  Pose p;
  p.rotation = Eigen::AngleAxisd(tilt_deg * std::numbers::pi / 180.0, axis).toRotationMatrix() * rot_z(spin_deg);
  p.translation = Vec3(0.0, 0.0, distance);
  return p;
}

}  // namespace stereomark::testing
