#include "stereomark/mesh_io.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "stereomark/error.hpp"
#include "stereomark/image_io.hpp"

namespace stereomark {
namespace {

int resolve_index(long raw, std::size_t count, int line_no) {
  const long idx = raw > 0 ? raw - 1 : static_cast<long>(count) + raw;
  if (raw == 0 || idx < 0 || idx >= static_cast<long>(count)) {
    throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": index out of range");
  }
  return static_cast<int>(idx);
}

struct Corner {
  int v = -1;
  int vt = -1;
  int vn = -1;
};

Corner parse_corner(const std::string& token, const std::vector<Vec3>& v, const std::vector<Point2>& vt,
                    const std::vector<Vec3>& vn, int line_no) {
  Corner c;
  std::array<std::string, 3> parts;
  std::size_t part = 0;
  for (char ch : token) {
    if (ch == '/') {
      if (++part > 2) throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": bad face");
    } else {
      parts[part].push_back(ch);
    }
  }
  try {
    c.v = resolve_index(std::stol(parts[0]), v.size(), line_no);
    if (!parts[1].empty()) c.vt = resolve_index(std::stol(parts[1]), vt.size(), line_no);
    if (!parts[2].empty()) c.vn = resolve_index(std::stol(parts[2]), vn.size(), line_no);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": bad face index");
  }
  return c;
}

void add_face(Mesh& mesh, const std::array<Vec3, 4>& corners, const Vec3& normal) {
  const int base = static_cast<int>(mesh.vertices.size());
  const std::array<Point2, 4> uv = {Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)};
  for (int i = 0; i < 4; ++i) {
    mesh.vertices.push_back(corners[i]);
    mesh.normals.push_back(normal);
    mesh.uvs.push_back(uv[i]);
  }
  mesh.triangles.push_back({base, base + 1, base + 2});
  mesh.triangles.push_back({base, base + 2, base + 3});
}

}  // namespace

Mesh parse_obj(std::string_view text) {
  std::vector<Vec3> v;
  std::vector<Vec3> vn;
  std::vector<Point2> vt;
  Mesh mesh;
  std::map<std::tuple<int, int, int>, int> unified;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool any_uv = false;
  bool any_missing_uv = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": bad v");
      v.emplace_back(x, y, z);
    } else if (tag == "vn") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": bad vn");
      const Vec3 n(x, y, z);
      if (!(n.norm() > 0.0)) throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": zero normal");
      vn.push_back(n.normalized());
    } else if (tag == "vt") {
      double s, t;
      if (!(ls >> s >> t)) throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": bad vt");
      vt.emplace_back(s, t);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string tok; ls >> tok;) tokens.push_back(tok);
      if (tokens.size() != 3) {
        throw Error(ErrorCode::kParse, "obj line " + std::to_string(line_no) + ": only triangle faces are supported");
      }
      std::array<Corner, 3> corners;
      for (int i = 0; i < 3; ++i) corners[i] = parse_corner(tokens[i], v, vt, vn, line_no);
      const Vec3 face_normal = (v[corners[1].v] - v[corners[0].v]).cross(v[corners[2].v] - v[corners[0].v]);
      std::array<int, 3> tri;
      for (int i = 0; i < 3; ++i) {
        const Corner& c = corners[i];
        if (c.vt >= 0) any_uv = true; else any_missing_uv = true;
        const bool flat = c.vn < 0;
        // Corners without an explicit normal get a private vertex carrying
        // the face normal.
        const auto key = std::make_tuple(c.v, c.vt, flat ? -2 - static_cast<int>(mesh.triangles.size()) : c.vn);
        auto it = unified.find(key);
        if (it == unified.end()) {
          const int idx = static_cast<int>(mesh.vertices.size());
          mesh.vertices.push_back(v[c.v]);
          if (flat) {
            mesh.normals.push_back(face_normal.norm() > 0.0 ? face_normal.normalized() : Vec3(0, 0, -1));
          } else {
            mesh.normals.push_back(vn[c.vn]);
          }
          mesh.uvs.push_back(c.vt >= 0 ? vt[c.vt] : Point2::Zero());
          it = unified.emplace(key, idx).first;
        }
        tri[i] = it->second;
      }
      mesh.triangles.push_back(tri);
    }
    // Other statements (o, g, s, usemtl, mtllib) carry nothing we render.
  }
  if (!any_uv || any_missing_uv) {
    if (any_uv && any_missing_uv) throw Error(ErrorCode::kParse, "obj mixes faces with and without texture coordinates");
    mesh.uvs.clear();
  }
  mesh.validate();
  return mesh;
}

Mesh load_obj(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_obj({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

std::string write_obj(const Mesh& mesh) {
  std::string out = "# stereomark mesh\n";
  char buf[128];
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  for (const auto& t : mesh.uvs) {
    std::snprintf(buf, sizeof(buf), "vt %.9g %.9g\n", t.x(), t.y());
    out += buf;
  }
  for (const auto& n : mesh.normals) {
    std::snprintf(buf, sizeof(buf), "vn %.9g %.9g %.9g\n", n.x(), n.y(), n.z());
    out += buf;
  }
  const bool uv = !mesh.uvs.empty();
  for (const auto& t : mesh.triangles) {
    out += "f";
    for (int i : t) {
      if (uv) {
        std::snprintf(buf, sizeof(buf), " %d/%d/%d", i + 1, i + 1, i + 1);
      } else {
        std::snprintf(buf, sizeof(buf), " %d//%d", i + 1, i + 1);
      }
      out += buf;
    }
    out += "\n";
  }
  return out;
}

Mesh make_box(const Vec3& min_corner, const Vec3& max_corner) {
  Mesh mesh;
  for (int axis = 0; axis < 3; ++axis) {
    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    for (int sign : {-1, 1}) {
      // Tangents (t1, t2) with t1 x t2 = outward normal.
      const int t1 = sign > 0 ? b : c;
      const int t2 = sign > 0 ? c : b;
      Vec3 normal = Vec3::Zero();
      normal[axis] = sign;
      std::array<Vec3, 4> corners;
      const std::array<std::pair<int, int>, 4> steps = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
      for (int k = 0; k < 4; ++k) {
        Vec3 p;
        p[axis] = sign > 0 ? max_corner[axis] : min_corner[axis];
        p[t1] = steps[k].first ? max_corner[t1] : min_corner[t1];
        p[t2] = steps[k].second ? max_corner[t2] : min_corner[t2];
        corners[k] = p;
      }
      add_face(mesh, corners, normal);
    }
  }
  return mesh;
}

Mesh merge_meshes(std::span<const Mesh> parts) {
  Mesh out;
  for (const auto& part : parts) {
    const int base = static_cast<int>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
    out.normals.insert(out.normals.end(), part.normals.begin(), part.normals.end());
    if (part.uvs.empty()) {
      out.uvs.insert(out.uvs.end(), part.vertices.size(), Point2::Zero());
    } else {
      out.uvs.insert(out.uvs.end(), part.uvs.begin(), part.uvs.end());
    }
    for (const auto& t : part.triangles) out.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  return out;
}

Mesh make_table(double w) {
  const double top = 0.45 * w;
  const double leg = 0.06 * w;
  std::vector<Mesh> parts;
  parts.push_back(make_box({-top, -top, -0.50 * w}, {top, top, -0.44 * w}));
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double x = sx * (top - leg);
      const double y = sy * (top - leg);
      parts.push_back(make_box({x - leg, y - leg, -0.44 * w}, {x + leg, y + leg, 0.0}));
    }
  }
  return merge_meshes(parts);
}

Mesh make_single_seat(double w) {
  const double half = 0.30 * w;
  const double leg = 0.05 * w;
  std::vector<Mesh> parts;
  parts.push_back(make_box({-half, -half, -0.30 * w}, {half, half, -0.24 * w}));
  parts.push_back(make_box({-half, -half, -0.75 * w}, {half, -half + 0.07 * w, -0.30 * w}));
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double x = sx * (half - leg);
      const double y = sy * (half - leg);
      parts.push_back(make_box({x - leg, y - leg, -0.24 * w}, {x + leg, y + leg, 0.0}));
    }
  }
  return merge_meshes(parts);
}

Mesh make_double_seat(double w) {
  const double hx = 0.48 * w;
  const double hy = 0.26 * w;
  const double arm = 0.08 * w;
  std::vector<Mesh> parts;
  parts.push_back(make_box({-hx, -hy, -0.22 * w}, {hx, hy, 0.0}));
  parts.push_back(make_box({-hx, -hy, -0.55 * w}, {hx, -hy + 0.10 * w, -0.22 * w}));
  parts.push_back(make_box({-hx, -hy + 0.10 * w, -0.36 * w}, {-hx + arm, hy, -0.22 * w}));
  parts.push_back(make_box({hx - arm, -hy + 0.10 * w, -0.36 * w}, {hx, hy, -0.22 * w}));
  return merge_meshes(parts);
}

bool is_builtin_mesh(std::string_view name) { return name.starts_with("builtin:"); }

Mesh make_builtin_mesh(std::string_view name) {
  constexpr double kWidth = 0.08;
  if (name == "builtin:table") return make_table(kWidth);
  if (name == "builtin:seat") return make_single_seat(kWidth);
  if (name == "builtin:double_seat") return make_double_seat(kWidth);
  if (name == "builtin:cube") return make_box(Vec3(-0.02, -0.02, -0.04), Vec3(0.02, 0.02, 0.0));
  throw Error(ErrorCode::kNotFound, "unknown builtin mesh " + std::string(name));
}

bool is_builtin_texture(std::string_view name) { return name.starts_with("builtin:"); }

Texture make_builtin_texture(std::string_view name) {
  constexpr int kSize = 64;
  Texture tex(kSize, kSize);
  if (name == "builtin:checker") {
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        const bool on = ((x / 8) + (y / 8)) % 2 == 0;
        tex.at(x, y) = on ? Rgb{230, 230, 230} : Rgb{40, 40, 40};
      }
    }
  } else if (name == "builtin:wood") {
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        const double grain = 0.5 + 0.5 * std::sin(0.45 * x + 2.0 * std::sin(0.15 * y));
        tex.at(x, y) = {static_cast<std::uint8_t>(150 + 60 * grain), static_cast<std::uint8_t>(95 + 40 * grain),
                        static_cast<std::uint8_t>(45 + 20 * grain)};
      }
    }
  } else if (name == "builtin:fabric") {
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        const bool weave = ((x / 2) % 2) != ((y / 2) % 2);
        tex.at(x, y) = weave ? Rgb{60, 110, 170} : Rgb{45, 85, 140};
      }
    }
  } else {
    throw Error(ErrorCode::kNotFound, "unknown builtin texture " + std::string(name));
  }
  return tex;
}

}  // namespace stereomark
