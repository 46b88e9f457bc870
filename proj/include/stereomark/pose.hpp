#pragma once

#include <array>
#include <string>

#include "stereomark/camera.hpp"
#include "stereomark/geometry.hpp"
#include "stereomark/homography.hpp"
#include "stereomark/marker.hpp"

namespace stereomark {

// Camera-from-marker rigid transform: p_cam = rotation * p_marker + translation.
// Marker axes: X along pattern columns, Y along pattern rows (down), Z = X x Y,
// pointing away from a viewer who sees the printed face.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  friend bool operator==(const Pose& a, const Pose& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

// Column-major 4x4 homogeneous matrix in the layout glLoadMatrixd consumes.
// The values are in the engine's camera convention (Y down, Z forward); a GL
// consumer wanting Y up / Z backward premultiplies by diag(1, -1, -1, 1).
using ModelView16 = std::array<double, 16>;

ModelView16 to_modelview16(const Pose& pose);
// Inverse of to_modelview16. Throws kInvalidInput when the bottom row is not
// (0, 0, 0, 1).
Pose from_modelview16(const ModelView16& m);
// 16 whitespace-separated decimals, round-trippable.
std::string format_modelview16(const ModelView16& m);

enum class EyeSide { kLeft, kRight };

// Parallel-axis stereo: the rotation is kept and translation.x moves by
// +separation/2 (left) or -separation/2 (right).
Pose eye_offset(const Pose& pose, EyeSide side, double separation);

struct PoseParams {
  double max_reprojection_error = 3.0;  // mean over the four corners, px
  int refine_iterations = 10;           // reprojection-error polish after the homography; 0 disables
};

// Homography (marker plane meters -> pixels) decomposition with polar
// re-orthonormalisation. Throws kPoseFailure for degenerate input.
Pose pose_from_homography(const Homography& h, const CameraIntrinsics& cam);

// Marker corners in marker coordinates in canonical order (TL, BL, BR, TR of
// the pattern), shifted by center_offset.
std::array<Vec3, 4> marker_object_corners(const MarkerPattern& pattern);

double mean_reprojection_error(const Pose& pose, const MarkerPattern& pattern, const Quad& corners,
                               const CameraIntrinsics& cam);

// Homography pose polished by minimising corner reprojection error.
// Throws kPoseFailure (degenerate geometry) or kLowQualityPose (mean corner
// reprojection error above params.max_reprojection_error).
Pose pose_from_marker(const DetectedMarker& det, const MarkerPattern& pattern, const CameraIntrinsics& cam,
                      const PoseParams& params = {});

// Angle of rotation taking a onto b, radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

}  // namespace stereomark
