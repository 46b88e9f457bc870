#include "stereomark/pose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "stereomark/error.hpp"

namespace stereomark {

ModelView16 to_modelview16(const Pose& pose) {
  ModelView16 m{};
  for (int col = 0; col < 3; ++col) {
    for (int row = 0; row < 3; ++row) m[col * 4 + row] = pose.rotation(row, col);
    m[col * 4 + 3] = 0.0;
  }
  m[12] = pose.translation.x();
  m[13] = pose.translation.y();
  m[14] = pose.translation.z();
  m[15] = 1.0;
  return m;
}

Pose from_modelview16(const ModelView16& m) {
  if (m[3] != 0.0 || m[7] != 0.0 || m[11] != 0.0 || m[15] != 1.0) {
    throw Error(ErrorCode::kInvalidInput, "modelview bottom row must be (0, 0, 0, 1)");
  }
  Pose pose;
  for (int col = 0; col < 3; ++col) {
    for (int row = 0; row < 3; ++row) pose.rotation(row, col) = m[col * 4 + row];
  }
  pose.translation = {m[12], m[13], m[14]};
  return pose;
}

std::string format_modelview16(const ModelView16& m) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", m[i]);
    if (i) out.push_back(' ');
    out += buf;
  }
  return out;
}

Pose eye_offset(const Pose& pose, EyeSide side, double separation) {
  if (separation < 0.0) throw Error(ErrorCode::kInvalidParameter, "eye separation must be >= 0");
  Pose out = pose;
  const double half = 0.5 * separation;
  out.translation.x() += side == EyeSide::kLeft ? half : -half;
  return out;
}

Pose pose_from_homography(const Homography& h, const CameraIntrinsics& cam) {
  const Mat3 m = cam.matrix().inverse() * h.m;
  const Vec3 m1 = m.col(0);
  const Vec3 m2 = m.col(1);
  const Vec3 m3 = m.col(2);
  const double norm_sum = m1.norm() + m2.norm();
  if (!(norm_sum > 1e-12) || !m.allFinite()) throw Error(ErrorCode::kPoseFailure, "degenerate homography");
  double lambda = 2.0 / norm_sum;
  // The homography scale sign is arbitrary; pick the one that puts the marker
  // in front of the camera.
  if (lambda * m3.z() < 0.0) lambda = -lambda;
  const Vec3 r1 = lambda * m1;
  const Vec3 r2 = lambda * m2;
  Mat3 q;
  q.col(0) = r1;
  q.col(1) = r2;
  q.col(2) = r1.cross(r2);

  Eigen::JacobiSVD<Mat3> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  Pose pose;
  pose.rotation = u * v.transpose();
  pose.translation = lambda * m3;
  if (!pose.rotation.allFinite() || !(pose.translation.z() > 0.0)) {
    throw Error(ErrorCode::kPoseFailure, "homography does not describe a marker in front of the camera");
  }
  return pose;
}

std::array<Vec3, 4> marker_object_corners(const MarkerPattern& pattern) {
  const double h = 0.5 * pattern.physical_width;
  const double ox = pattern.center_offset.x();
  const double oy = pattern.center_offset.y();
  return {Vec3(-h + ox, -h + oy, 0.0), Vec3(-h + ox, h + oy, 0.0), Vec3(h + ox, h + oy, 0.0),
          Vec3(h + ox, -h + oy, 0.0)};
}

double mean_reprojection_error(const Pose& pose, const MarkerPattern& pattern, const Quad& corners,
                               const CameraIntrinsics& cam) {
  const auto object = marker_object_corners(pattern);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += (project(cam, pose.apply(object[i])) - corners[i]).norm();
  return sum / 4.0;
}

namespace {

// Levenberg-Marquardt on the summed squared corner reprojection error,
// rotation updated through a left-multiplied rotation vector.
Pose refine_pose(Pose pose, const std::array<Vec3, 4>& object, const Quad& corners, const CameraIntrinsics& cam,
                 int iterations) {
  using Vec8 = Eigen::Matrix<double, 8, 1>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  auto residuals = [&](const Pose& p, Vec8& r) {
    for (int i = 0; i < 4; ++i) {
      const Vec3 c = p.apply(object[i]);
      if (c.z() <= kDefaultNearPlane) return false;
      r(2 * i) = cam.fx * c.x() / c.z() + cam.cx - corners[i].x();
      r(2 * i + 1) = cam.fy * c.y() / c.z() + cam.cy - corners[i].y();
    }
    return true;
  };
  auto perturbed = [](const Pose& p, const Vec6& d) {
    Pose q = p;
    const double angle = d.head<3>().norm();
    if (angle > 0.0) q.rotation = Eigen::AngleAxisd(angle, d.head<3>() / angle).toRotationMatrix() * p.rotation;
    q.translation += d.tail<3>();
    return q;
  };
  Vec8 r;
  if (!residuals(pose, r)) return pose;
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < iterations && cost > 1e-24; ++iter) {
    Eigen::Matrix<double, 8, 6> j;
    for (int k = 0; k < 6; ++k) {
      const double h = k < 3 ? 1e-7 : 1e-7 * std::max(1.0, pose.translation.norm());
      Vec6 d = Vec6::Zero();
      d(k) = h;
      Vec8 rp, rm;
      if (!residuals(perturbed(pose, d), rp) || !residuals(perturbed(pose, -d), rm)) return pose;
      j.col(k) = (rp - rm) / (2.0 * h);
    }
    const Eigen::Matrix<double, 6, 6> jtj = j.transpose() * j;
    const Vec6 g = j.transpose() * r;
    bool improved = false;
    while (lambda < 1e6) {
      Eigen::Matrix<double, 6, 6> a = jtj;
      a.diagonal() *= 1.0 + lambda;
      const Vec6 step = a.ldlt().solve(-g);
      const Pose candidate = perturbed(pose, step);
      Vec8 rc;
      if (step.allFinite() && residuals(candidate, rc) && rc.squaredNorm() < cost) {
        pose = candidate;
        r = rc;
        cost = rc.squaredNorm();
        lambda = std::max(lambda * 0.1, 1e-9);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return pose;
}

}  // namespace

Pose pose_from_marker(const DetectedMarker& det, const MarkerPattern& pattern, const CameraIntrinsics& cam,
                      const PoseParams& params) {
  if (!(pattern.physical_width > 0.0)) throw Error(ErrorCode::kPoseFailure, "marker width must be positive");
  const auto object = marker_object_corners(pattern);
  std::array<Point2, 4> plane;
  for (int i = 0; i < 4; ++i) plane[i] = object[i].head<2>();
  Homography h;
  try {
    h = estimate_homography(plane, det.corners);
  } catch (const Error& e) {
    throw Error(ErrorCode::kPoseFailure, e.what());
  }
  const Pose pose = refine_pose(pose_from_homography(h, cam), object, det.corners, cam, params.refine_iterations);
  double err = 0.0;
  try {
    err = mean_reprojection_error(pose, pattern, det.corners, cam);
  } catch (const Error&) {
    throw Error(ErrorCode::kPoseFailure, "marker corner behind the camera");
  }
  if (!(err <= params.max_reprojection_error)) {
    throw Error(ErrorCode::kLowQualityPose, "mean corner reprojection error " + std::to_string(err) + " px");
  }
  return pose;
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  // acos of the trace loses precision near 0; the axis-angle form does not.
  return Eigen::AngleAxisd(Mat3(a.transpose() * b)).angle();
}

}  // namespace stereomark
