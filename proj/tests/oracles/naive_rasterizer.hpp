#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "stereomark/renderer.hpp"

namespace stereomark::oracle {

// Reference renderer: every pixel is tested against every triangle, no
// bounding boxes, no clipping (all vertices must lie in front of the
// camera). Written separately from the production rasterizer; the per-
// fragment arithmetic is spelled out in the same order so results are
// expected to agree bit for bit.
class NaiveRasterizer {
 public:
  NaiveRasterizer(const CameraIntrinsics& cam, const Vec3& light_direction)
      : cam_(cam), light_(light_direction.normalized()) {}

  RenderTarget render(std::span<const RenderObject> objects) const {
    std::vector<Tri> tris;
    for (const auto& o : objects) {
      for (const auto& t : o.mesh->triangles) {
        Tri tri;
        tri.material = &o.material;
        for (int i = 0; i < 3; ++i) {
          const auto k = static_cast<std::size_t>(t[i]);
          const Vec3 p = o.pose.rotation * o.mesh->vertices[k] + o.pose.translation;
          tri.xy[i] = Point2(cam_.fx * p.x() / p.z() + cam_.cx, cam_.fy * p.y() / p.z() + cam_.cy);
          tri.inv_z[i] = 1.0 / p.z();
          tri.normal[i] = o.pose.rotation * o.mesh->normals[k];
          tri.uv[i] = o.mesh->uvs.empty() ? Point2::Zero() : o.mesh->uvs[k];
        }
        tris.push_back(tri);
      }
    }
    RenderTarget out(cam_.width, cam_.height);
    for (int y = 0; y < cam_.height; ++y) {
      for (int x = 0; x < cam_.width; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& tri : tris) {
          auto frag = fragment(tri, Point2(x, y));
          if (!frag || !(frag->z < best)) continue;
          best = frag->z;
          out.depth.at(x, y) = frag->z;
          out.coverage.at(x, y) = 1;
          out.color.at(x, y) = frag->color;
        }
      }
    }
    return out;
  }

 private:
  struct Tri {
    Point2 xy[3];
    double inv_z[3];
    Vec3 normal[3];
    Point2 uv[3];
    const Material* material;
  };
  struct Fragment {
    double z;
    Rgb color;
  };

  static double cross(const Point2& a, const Point2& b, const Point2& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  }

  // Owned edges: horizontal with the triangle below, or with the triangle
  // lying to the right of the edge.
  static bool owns_edge(const Point2& a, const Point2& b, const Point2& opposite) {
    if (a.y() == b.y()) return opposite.y() > a.y();
    const double x_on_edge = a.x() + (opposite.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
    return opposite.x() > x_on_edge;
  }

  std::optional<Fragment> fragment(const Tri& tri, const Point2& p) const {
    const double signed_area = cross(tri.xy[0], tri.xy[1], tri.xy[2]);
    if (!(signed_area < 0.0)) return std::nullopt;  // back face or degenerate
    // Re-wind so the interior is on the positive side of each edge.
    const int order[3] = {0, 2, 1};
    Point2 v[3];
    for (int i = 0; i < 3; ++i) v[i] = tri.xy[order[i]];
    const double area = cross(v[0], v[1], v[2]);
    double e[3];
    for (int i = 0; i < 3; ++i) {
      const Point2& a = v[(i + 1) % 3];
      const Point2& b = v[(i + 2) % 3];
      e[i] = cross(a, b, p);
      if (e[i] < 0.0) return std::nullopt;
      if (e[i] == 0.0 && !owns_edge(a, b, v[i])) return std::nullopt;
    }
    const double b0 = e[0] / area;
    const double b1 = e[1] / area;
    const double b2 = e[2] / area;
    const double w0 = tri.inv_z[order[0]];
    const double w1 = tri.inv_z[order[1]];
    const double w2 = tri.inv_z[order[2]];
    const double inv_z = b0 * w0 + b1 * w1 + b2 * w2;
    const double z = 1.0 / inv_z;
    const double p0 = b0 * w0 * z;
    const double p1 = b1 * w1 * z;
    const double p2 = b2 * w2 * z;
    const Vec3 normal =
        p0 * tri.normal[order[0]] + p1 * tri.normal[order[1]] + p2 * tri.normal[order[2]];
    const Point2 uv = p0 * tri.uv[order[0]] + p1 * tri.uv[order[1]] + p2 * tri.uv[order[2]];
    return Fragment{z, shade(normal, uv, *tri.material)};
  }

  static double texel_channel(const Texture& tex, double u, double v, int channel) {
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    const double x = std::clamp(u * tex.width() - 0.5, 0.0, static_cast<double>(tex.width() - 1));
    const double y = std::clamp((1.0 - v) * tex.height() - 0.5, 0.0, static_cast<double>(tex.height() - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, tex.width() - 1);
    const int y1 = std::min(y0 + 1, tex.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    auto c = [&](int tx, int ty) {
      const Rgb& px = tex.at(tx, ty);
      return static_cast<double>(channel == 0 ? px.r : channel == 1 ? px.g : px.b);
    };
    const double top = (1.0 - fx) * c(x0, y0) + fx * c(x1, y0);
    const double bottom = (1.0 - fx) * c(x0, y1) + fx * c(x1, y1);
    return ((1.0 - fy) * top + fy * bottom) / 255.0;
  }

  static std::uint8_t to_byte(double v) {
    const double scaled = std::round(v * 255.0);  // half away from zero
    return static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, scaled)));
  }

  Rgb shade(const Vec3& normal, const Point2& uv, const Material& m) const {
    const Vec3 n = normal.normalized();
    double albedo[3] = {m.diffuse.x(), m.diffuse.y(), m.diffuse.z()};
    if (m.texture) {
      for (int c = 0; c < 3; ++c) albedo[c] = albedo[c] * texel_channel(*m.texture, uv.x(), uv.y(), c);
    }
    const double facing = -n.dot(light_);
    const double lambert = facing > 0.0 ? facing : 0.0;
    const double intensity = m.ambient + (1.0 - m.ambient) * lambert;
    return {to_byte(albedo[0] * intensity), to_byte(albedo[1] * intensity), to_byte(albedo[2] * intensity)};
  }

  CameraIntrinsics cam_;
  Vec3 light_;
};

}  // namespace stereomark::oracle
