#include "stereomark/homography.hpp"

#include <array>
#include <cmath>

#include <Eigen/SVD>

#include "stereomark/error.hpp"

namespace stereomark {
namespace {

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Mat3 hartley_normalizer(std::span<const Point2, 4> pts) {
  Point2 centroid = Point2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= 4.0;
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= 4.0;
  if (!(mean_dist > 0.0)) throw Error(ErrorCode::kSingularSystem, "coincident correspondence points");
  const double s = std::sqrt(2.0) / mean_dist;
  Mat3 t;
  t << s, 0, -s * centroid.x(),
       0, s, -s * centroid.y(),
       0, 0, 1;
  return t;
}

// Rejects sets where any three points are collinear, relative to the set's
// spread so the test is scale free.
void require_general_position(std::span<const Point2, 4> pts, const char* which) {
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) scale = std::max(scale, (pts[i] - pts[j]).squaredNorm());
  }
  constexpr std::array<std::array<int, 3>, 4> kTriples = {{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
  for (const auto& t : kTriples) {
    const Point2 a = pts[t[1]] - pts[t[0]];
    const Point2 b = pts[t[2]] - pts[t[0]];
    const double twice_area = std::abs(a.x() * b.y() - a.y() * b.x());
    if (!(twice_area > 1e-10 * scale)) {
      throw Error(ErrorCode::kSingularSystem, std::string("collinear ") + which + " points");
    }
  }
}

}  // namespace

Homography estimate_homography(std::span<const Point2, 4> object_pts, std::span<const Point2, 4> image_pts) {
  require_general_position(object_pts, "object");
  require_general_position(image_pts, "image");
  const Mat3 t_obj = hartley_normalizer(object_pts);
  const Mat3 t_img = hartley_normalizer(image_pts);

  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Vec3 x = t_obj * Vec3(object_pts[i].x(), object_pts[i].y(), 1.0);
    const Vec3 u = t_img * Vec3(image_pts[i].x(), image_pts[i].y(), 1.0);
    a.row(2 * i) << 0, 0, 0, -u.z() * x.x(), -u.z() * x.y(), -u.z() * x.z(),
        u.y() * x.x(), u.y() * x.y(), u.y() * x.z();
    a.row(2 * i + 1) << u.z() * x.x(), u.z() * x.y(), u.z() * x.z(), 0, 0, 0,
        -u.x() * x.x(), -u.x() * x.y(), -u.x() * x.z();
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(7) > 1e-10 * sv(0))) throw Error(ErrorCode::kSingularSystem, "rank-deficient DLT system");
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Homography out;
  out.m = t_img.inverse() * hn * t_obj;
  if (std::abs(out.m(2, 2)) > 1e-12) out.m /= out.m(2, 2);
  if (!(std::abs(out.m.determinant()) > 0.0) || !out.m.allFinite()) {
    throw Error(ErrorCode::kSingularSystem, "singular homography");
  }
  return out;
}

}  // namespace stereomark
