#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stereomark/renderer.hpp"

namespace stereomark {

// OBJ subset: v, vn, vt, f with triangle faces only. Face corners may be
// v, v/vt, v//vn or v/vt/vn; missing normals are filled with the face normal.
Mesh parse_obj(std::string_view text);
Mesh load_obj(const std::filesystem::path& path);
std::string write_obj(const Mesh& mesh);

// Sample geometry. Meshes stand on the z = 0 plane and extend toward -Z,
// which is toward the viewer of a front-facing marker.
Mesh make_box(const Vec3& min_corner, const Vec3& max_corner);
Mesh merge_meshes(std::span<const Mesh> parts);
Mesh make_table(double width);
Mesh make_single_seat(double width);
Mesh make_double_seat(double width);
// "builtin:table", "builtin:seat", "builtin:double_seat", "builtin:cube".
bool is_builtin_mesh(std::string_view name);
Mesh make_builtin_mesh(std::string_view name);

// Procedural textures: "builtin:wood", "builtin:fabric", "builtin:checker".
bool is_builtin_texture(std::string_view name);
Texture make_builtin_texture(std::string_view name);

}  // namespace stereomark
