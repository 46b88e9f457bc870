#include "stereomark/camera.hpp"

#include "stereomark/error.hpp"

namespace stereomark {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::kInvalidParameter, "focal lengths must be positive");
  if (width < 1 || height < 1) throw Error(ErrorCode::kInvalidParameter, "image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::kInvalidParameter, "principal point outside the image");
  }
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0, cx,
       0, fy, cy,
       0, 0, 1;
  return k;
}

Point2 project(const CameraIntrinsics& cam, const Vec3& p_cam, double near) {
  if (!(p_cam.z() > near)) throw Error(ErrorCode::kBehindCamera, "point is behind the near plane");
  return {cam.fx * p_cam.x() / p_cam.z() + cam.cx, cam.fy * p_cam.y() / p_cam.z() + cam.cy};
}

}  // namespace stereomark
