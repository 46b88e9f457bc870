#include "stereomark/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "stereomark/error.hpp"

namespace stereomark {
namespace {

struct ClipVertex {
  Vec3 position;  // camera space
  Vec3 normal;
  Point2 uv;
};

struct ScreenVertex {
  Point2 xy;
  double inv_z;
  Vec3 normal;
  Point2 uv;
};

// Twice the signed area of (a, b, p) in raw pixel coordinates; positive when
// p lies to the right of a->b as displayed.
double edge(const Point2& a, const Point2& b, const Point2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// For triangles with positive edge() area (clockwise as displayed), top edges
// run rightwards and left edges run upwards.
bool is_top_left(const Point2& a, const Point2& b) {
  const double dx = b.x() - a.x();
  const double dy = b.y() - a.y();
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri, double near) {
  std::vector<ClipVertex> out;
  out.reserve(4);
  for (std::size_t i = 0; i < 3; ++i) {
    const ClipVertex& a = tri[i];
    const ClipVertex& b = tri[(i + 1) % 3];
    const bool a_in = a.position.z() >= near;
    const bool b_in = b.position.z() >= near;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double t = (near - a.position.z()) / (b.position.z() - a.position.z());
      ClipVertex c;
      c.position = a.position + t * (b.position - a.position);
      c.position.z() = near;
      c.normal = a.normal + t * (b.normal - a.normal);
      c.uv = a.uv + t * (b.uv - a.uv);
      out.push_back(c);
    }
  }
  return out;
}

class Rasterizer {
 public:
  Rasterizer(RenderTarget& target, const RenderParams& params)
      : target_(target), light_(params.light_direction.normalized()) {}

  void draw(const ScreenVertex& v0, ScreenVertex v1, ScreenVertex v2, const Material& material) {
    double area = edge(v0.xy, v1.xy, v2.xy);
    // Front faces are counterclockwise as displayed, i.e. negative here.
    if (!(area < 0.0)) return;
    std::swap(v1, v2);
    area = -area;

    const double min_x = std::min({v0.xy.x(), v1.xy.x(), v2.xy.x()});
    const double max_x = std::max({v0.xy.x(), v1.xy.x(), v2.xy.x()});
    const double min_y = std::min({v0.xy.y(), v1.xy.y(), v2.xy.y()});
    const double max_y = std::max({v0.xy.y(), v1.xy.y(), v2.xy.y()});
    const int x0 = std::max(0, static_cast<int>(std::ceil(min_x)));
    const int x1 = std::min(target_.width() - 1, static_cast<int>(std::floor(max_x)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(min_y)));
    const int y1 = std::min(target_.height() - 1, static_cast<int>(std::floor(max_y)));

    const bool tl0 = is_top_left(v1.xy, v2.xy);
    const bool tl1 = is_top_left(v2.xy, v0.xy);
    const bool tl2 = is_top_left(v0.xy, v1.xy);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Point2 p(x, y);
        const double e0 = edge(v1.xy, v2.xy, p);
        const double e1 = edge(v2.xy, v0.xy, p);
        const double e2 = edge(v0.xy, v1.xy, p);
        if (!(e0 > 0.0 || (e0 == 0.0 && tl0))) continue;
        if (!(e1 > 0.0 || (e1 == 0.0 && tl1))) continue;
        if (!(e2 > 0.0 || (e2 == 0.0 && tl2))) continue;
        const double b0 = e0 / area;
        const double b1 = e1 / area;
        const double b2 = e2 / area;
        const double inv_z = b0 * v0.inv_z + b1 * v1.inv_z + b2 * v2.inv_z;
        const double z = 1.0 / inv_z;
        if (!(z < target_.depth.at(x, y))) continue;
        const double p0 = b0 * v0.inv_z * z;
        const double p1 = b1 * v1.inv_z * z;
        const double p2 = b2 * v2.inv_z * z;
        const Vec3 normal = p0 * v0.normal + p1 * v1.normal + p2 * v2.normal;
        const Point2 uv = p0 * v0.uv + p1 * v1.uv + p2 * v2.uv;
        target_.depth.at(x, y) = z;
        target_.coverage.at(x, y) = 1;
        target_.color.at(x, y) = shade(normal, uv, material);
      }
    }
  }

 private:
  Rgb shade(const Vec3& normal, const Point2& uv, const Material& material) const {
    const Vec3 n = normal.normalized();
    Vec3 albedo = material.diffuse;
    if (material.texture) albedo = albedo.cwiseProduct(sample_texture(*material.texture, uv));
    const double lambert = std::max(0.0, -n.dot(light_));
    const double intensity = material.ambient + (1.0 - material.ambient) * lambert;
    return {quantize_channel(albedo.x() * intensity), quantize_channel(albedo.y() * intensity),
            quantize_channel(albedo.z() * intensity)};
  }

  RenderTarget& target_;
  Vec3 light_;
};

}  // namespace

void Mesh::validate() const {
  if (normals.size() != vertices.size()) throw Error(ErrorCode::kInvalidInput, "mesh needs one normal per vertex");
  if (!uvs.empty() && uvs.size() != vertices.size()) {
    throw Error(ErrorCode::kInvalidInput, "mesh uvs must be empty or one per vertex");
  }
  const int n = static_cast<int>(vertices.size());
  for (const auto& t : triangles) {
    for (int i : t) {
      if (i < 0 || i >= n) throw Error(ErrorCode::kInvalidInput, "mesh triangle index out of range");
    }
  }
  for (const auto& nrm : normals) {
    if (std::abs(nrm.norm() - 1.0) > 1e-6) throw Error(ErrorCode::kInvalidInput, "mesh normals must be unit length");
  }
}

Mesh Mesh::scaled(double factor) const {
  Mesh out = *this;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

void Material::validate() const {
  if ((diffuse.array() < 0.0).any() || (diffuse.array() > 1.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "diffuse channels must be in [0, 1]");
  }
  if (!(ambient >= 0.0 && ambient <= 1.0)) throw Error(ErrorCode::kInvalidInput, "ambient must be in [0, 1]");
  if (texture && texture->empty()) throw Error(ErrorCode::kInvalidInput, "texture must be at least 1x1");
}

RenderTarget::RenderTarget(int width, int height)
    : color(width, height),
      coverage(width, height, 0),
      depth(width, height, std::numeric_limits<double>::infinity()) {}

std::uint8_t quantize_channel(double value) {
  const long q = std::lround(value * 255.0);
  return static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
}

Vec3 sample_texture(const Texture& tex, const Point2& uv) {
  const double u = std::clamp(uv.x(), 0.0, 1.0);
  const double v = std::clamp(uv.y(), 0.0, 1.0);
  const double x = std::clamp(u * tex.width() - 0.5, 0.0, static_cast<double>(tex.width() - 1));
  const double y = std::clamp((1.0 - v) * tex.height() - 0.5, 0.0, static_cast<double>(tex.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, tex.width() - 1);
  const int y1 = std::min(y0 + 1, tex.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  auto texel = [&](int tx, int ty) {
    const Rgb& c = tex.at(tx, ty);
    return Vec3(c.r, c.g, c.b);
  };
  const Vec3 top = (1.0 - fx) * texel(x0, y0) + fx * texel(x1, y0);
  const Vec3 bottom = (1.0 - fx) * texel(x0, y1) + fx * texel(x1, y1);
  return ((1.0 - fy) * top + fy * bottom) / 255.0;
}

RenderTarget render(std::span<const RenderObject> objects, const CameraIntrinsics& cam, const RenderParams& params) {
  RenderTarget target(cam.width, cam.height);
  Rasterizer raster(target, params);
  for (const auto& object : objects) {
    if (!object.mesh) continue;
    const Mesh& mesh = *object.mesh;
    const bool has_uv = !mesh.uvs.empty();
    for (const auto& tri : mesh.triangles) {
      std::array<ClipVertex, 3> cv;
      for (int i = 0; i < 3; ++i) {
        const auto idx = static_cast<std::size_t>(tri[i]);
        cv[i].position = object.pose.rotation * mesh.vertices[idx] + object.pose.translation;
        cv[i].normal = object.pose.rotation * mesh.normals[idx];
        cv[i].uv = has_uv ? mesh.uvs[idx] : Point2::Zero();
      }
      const auto poly = clip_near(cv, params.near_plane);
      if (poly.size() < 3) continue;
      std::vector<ScreenVertex> sv(poly.size());
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3& p = poly[i].position;
        sv[i].xy = {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
        sv[i].inv_z = 1.0 / p.z();
        sv[i].normal = poly[i].normal;
        sv[i].uv = poly[i].uv;
      }
      for (std::size_t i = 1; i + 1 < sv.size(); ++i) raster.draw(sv[0], sv[i], sv[i + 1], object.material);
    }
  }
  return target;
}

}  // namespace stereomark
