#pragma once

#include <array>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "stereomark/camera.hpp"
#include "stereomark/geometry.hpp"
#include "stereomark/image.hpp"
#include "stereomark/pose.hpp"

namespace stereomark {

// Indexed triangle mesh. Front faces wind counterclockwise when seen from
// outside (OBJ convention). `uvs` is either empty or one per vertex.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<Point2> uvs;
  std::vector<std::array<int, 3>> triangles;

  // Throws kInvalidInput on out-of-range indices, size mismatches or
  // non-unit normals.
  void validate() const;
  Mesh scaled(double factor) const;
};

using Texture = Frame;

struct Material {
  Vec3 diffuse = Vec3::Ones();  // [0, 1]^3
  double ambient = 0.2;         // [0, 1]
  std::shared_ptr<const Texture> texture;

  void validate() const;
};

struct RenderObject {
  std::shared_ptr<const Mesh> mesh;
  Material material;
  Pose pose;  // object -> camera
};

struct CoverageTag;
using CoverageMask = Raster<std::uint8_t, CoverageTag>;
using DepthBuffer = Raster<double>;

struct RenderTarget {
  Frame color;
  CoverageMask coverage;
  DepthBuffer depth;  // camera-space z, +inf where uncovered

  RenderTarget() = default;
  RenderTarget(int width, int height);

  int width() const { return color.width(); }
  int height() const { return color.height(); }
  friend bool operator==(const RenderTarget&, const RenderTarget&) = default;
};

struct RenderParams {
  Vec3 light_direction = Vec3(0.0, 0.0, 1.0);  // direction light travels, camera space
  double near_plane = kDefaultNearPlane;
};

// Near-plane clipping, back-face culling, top-left fill rule at pixel
// centres, perspective-correct interpolation, z-buffer with the lower
// triangle index winning ties, ambient + Lambert headlight shading, bilinear
// clamped texturing, round-half-away-from-zero quantisation.
RenderTarget render(std::span<const RenderObject> objects, const CameraIntrinsics& cam,
                    const RenderParams& params = {});

// Clamp-to-edge bilinear texel fetch; v = 0 is the bottom row (OBJ
// convention). Returns RGB in [0, 1].
Vec3 sample_texture(const Texture& tex, const Point2& uv);

std::uint8_t quantize_channel(double value);

}  // namespace stereomark
