#include "stereomark/config.hpp"

#include <fstream>

#include "stereomark/error.hpp"
#include "stereomark/image_io.hpp"
#include "stereomark/mesh_io.hpp"

namespace stereomark {
namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad field \"") + key + "\": " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

Vec3 vec3_field(const Json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = field<std::vector<double>>(j, key);
  if (v.size() != 3) throw Error(ErrorCode::kParse, std::string("\"") + key + "\" must have 3 entries");
  return {v[0], v[1], v[2]};
}

ChannelMask mask_field(const Json& j, const char* key, ChannelMask fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = field<std::vector<int>>(j, key);
  if (v.size() != 3) throw Error(ErrorCode::kParse, std::string("\"") + key + "\" must have 3 entries");
  return {v[0] != 0, v[1] != 0, v[2] != 0};
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& ref) {
  const std::filesystem::path p(ref);
  return p.is_absolute() ? p : base / p;
}

// A reference field is either a path (resolved against base) or an inline
// object. Returns the object and records the path, if any, in `ref`.
Json referenced_object(const Json& j, const char* key, const std::filesystem::path& base, std::string& ref) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string("missing field \"") + key + "\"");
  const Json& v = j.at(key);
  if (v.is_string()) {
    ref = v.get<std::string>();
    return read_json_file(resolve_path(base, ref));
  }
  if (v.is_object()) {
    ref.clear();
    return v;
  }
  throw Error(ErrorCode::kParse, std::string("\"") + key + "\" must be a path or an object");
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

MarkerDictionary dictionary_from_json(const Json& j) {
  MarkerDictionary dict;
  dict.grid_size = field_or<int>(j, "grid_size", 6);
  dict.min_hamming = field_or<int>(j, "min_hamming", 4);
  for (const auto& pj : field<Json>(j, "patterns")) {
    MarkerPattern p;
    p.id = field<int>(pj, "id");
    p.grid = PatternGrid::from_rows(field<std::vector<std::string>>(pj, "rows"));
    p.physical_width = field_or<double>(pj, "physical_width_m", 0.08);
    const auto off = field_or<std::vector<double>>(pj, "center_offset_m", {0.0, 0.0});
    if (off.size() != 2) throw Error(ErrorCode::kParse, "center_offset_m must have 2 entries");
    p.center_offset = {off[0], off[1]};
    dict.patterns.push_back(std::move(p));
  }
  return dict;
}

Json to_json(const MarkerDictionary& dict) {
  Json patterns = Json::array();
  for (const auto& p : dict.patterns) {
    patterns.push_back({{"id", p.id},
                        {"physical_width_m", p.physical_width},
                        {"center_offset_m", {p.center_offset.x(), p.center_offset.y()}},
                        {"rows", p.grid.rows()}});
  }
  return {{"grid_size", dict.grid_size}, {"min_hamming", dict.min_hamming}, {"patterns", patterns}};
}

MarkerDictionary load_dictionary(const std::filesystem::path& path) {
  return dictionary_from_json(read_json_file(path));
}

CameraIntrinsics intrinsics_from_json(const Json& j) {
  CameraIntrinsics cam;
  cam.fx = field<double>(j, "fx");
  cam.fy = field<double>(j, "fy");
  cam.cx = field<double>(j, "cx");
  cam.cy = field<double>(j, "cy");
  cam.width = field<int>(j, "width");
  cam.height = field<int>(j, "height");
  cam.validate();
  return cam;
}

Json to_json(const CameraIntrinsics& cam) {
  return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  return intrinsics_from_json(read_json_file(path));
}

Json to_json(const Pose& pose) {
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation(r, c));
  }
  return {{"rotation", rot},
          {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

Pose pose_from_json(const Json& j) {
  Pose pose;
  if (j.contains("rotation")) {
    const auto r = field<std::vector<double>>(j, "rotation");
    if (r.size() != 9) throw Error(ErrorCode::kParse, "rotation must have 9 entries (row-major)");
    for (int i = 0; i < 9; ++i) pose.rotation(i / 3, i % 3) = r[i];
  }
  pose.translation = vec3_field(j, "translation", Vec3::Zero());
  return pose;
}

Json to_json(const DetectedMarker& det) {
  Json corners = Json::array();
  for (const auto& c : det.corners) corners.push_back({c.x(), c.y()});
  return {{"id", det.pattern_id},
          {"rotation_index", det.rotation_index},
          {"confidence", det.confidence},
          {"corners_px", corners}};
}

Json to_json(const ValidationReport& report) {
  Json sym = Json::array();
  for (const auto& v : report.symmetry) {
    sym.push_back({{"id", v.id}, {"quarter_turns", v.quarter_turns}, {"distance", v.distance}});
  }
  Json uniq = Json::array();
  for (const auto& v : report.uniqueness) {
    uniq.push_back({{"ids", {v.id_a, v.id_b}}, {"distance", v.distance}});
  }
  return {{"ok", report.ok()}, {"structural", report.structural}, {"symmetry", sym}, {"uniqueness", uniq}};
}

SceneBundle scene_bundle_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "scene must be a JSON object");
  SceneBundle bundle;
  Scene& scene = bundle.scene;
  bundle.intrinsics = intrinsics_from_json(referenced_object(j, "intrinsics", base_dir, scene.intrinsics_ref));
  bundle.dictionary = dictionary_from_json(referenced_object(j, "dictionary", base_dir, scene.dictionary_ref));

  const Json anaglyph = field_or<Json>(j, "anaglyph", Json::object());
  scene.anaglyph.enabled = field_or<bool>(anaglyph, "enabled", true);
  scene.anaglyph.separation = field_or<double>(anaglyph, "separation_m", 0.06);
  scene.anaglyph.left_mask = mask_field(anaglyph, "left_mask", scene.anaglyph.left_mask);
  scene.anaglyph.right_mask = mask_field(anaglyph, "right_mask", scene.anaglyph.right_mask);

  for (const auto& bj : field_or<Json>(j, "bindings", Json::array())) {
    Binding b;
    b.marker_id = field<int>(bj, "marker_id");
    b.mesh_ref = field<std::string>(bj, "mesh");
    b.texture_ref = field_or<std::string>(bj, "texture", "");
    b.translation = vec3_field(bj, "translation_m", Vec3::Zero());
    b.scale = field_or<double>(bj, "scale", 1.0);
    b.material.diffuse = vec3_field(bj, "diffuse", Vec3::Ones());
    b.material.ambient = field_or<double>(bj, "ambient", 0.2);
    b.mesh = std::make_shared<const Mesh>(is_builtin_mesh(b.mesh_ref) ? make_builtin_mesh(b.mesh_ref)
                                                                      : load_obj(resolve_path(base_dir, b.mesh_ref)));
    if (!b.texture_ref.empty()) {
      b.material.texture = std::make_shared<const Texture>(
          is_builtin_texture(b.texture_ref) ? make_builtin_texture(b.texture_ref)
                                            : load_frame(resolve_path(base_dir, b.texture_ref)));
    }
    scene.bindings.push_back(std::move(b));
  }
  scene.validate();
  const ValidationReport report = validate_dictionary(bundle.dictionary);
  if (!report.ok()) throw Error(ErrorCode::kInvalidParameter, "scene dictionary failed validation");
  return bundle;
}

SceneBundle load_scene_bundle(const std::filesystem::path& path) {
  return scene_bundle_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const Scene& scene) {
  Json bindings = Json::array();
  for (const auto& b : scene.bindings) {
    Json bj = {{"marker_id", b.marker_id},
               {"mesh", b.mesh_ref},
               {"diffuse", {b.material.diffuse.x(), b.material.diffuse.y(), b.material.diffuse.z()}},
               {"ambient", b.material.ambient},
               {"translation_m", {b.translation.x(), b.translation.y(), b.translation.z()}},
               {"scale", b.scale}};
    if (!b.texture_ref.empty()) bj["texture"] = b.texture_ref;
    bindings.push_back(std::move(bj));
  }
  auto mask = [](const ChannelMask& m) { return Json{m[0] ? 1 : 0, m[1] ? 1 : 0, m[2] ? 1 : 0}; };
  return {{"intrinsics", scene.intrinsics_ref},
          {"dictionary", scene.dictionary_ref},
          {"anaglyph",
           {{"enabled", scene.anaglyph.enabled},
            {"separation_m", scene.anaglyph.separation},
            {"left_mask", mask(scene.anaglyph.left_mask)},
            {"right_mask", mask(scene.anaglyph.right_mask)}}},
          {"bindings", bindings}};
}

Json bundle_to_json(const SceneBundle& bundle) {
  Json j = to_json(bundle.scene);
  if (bundle.scene.intrinsics_ref.empty()) j["intrinsics"] = to_json(bundle.intrinsics);
  if (bundle.scene.dictionary_ref.empty()) j["dictionary"] = to_json(bundle.dictionary);
  return j;
}

SynthSpec synth_spec_from_json(const Json& j, const std::filesystem::path& base_dir) {
  SynthSpec spec;
  std::string ref;
  spec.cam = intrinsics_from_json(referenced_object(j, "intrinsics", base_dir, ref));
  const MarkerDictionary dict = dictionary_from_json(referenced_object(j, "dictionary", base_dir, ref));
  if (j.contains("background")) {
    const auto bg = field<std::vector<int>>(j, "background");
    if (bg.size() != 3) throw Error(ErrorCode::kParse, "background must have 3 entries");
    spec.background = {static_cast<std::uint8_t>(bg[0]), static_cast<std::uint8_t>(bg[1]),
                       static_cast<std::uint8_t>(bg[2])};
  }
  if (j.contains("background_image")) {
    spec.background_image =
        std::make_shared<const Frame>(load_frame(resolve_path(base_dir, field<std::string>(j, "background_image"))));
  }
  if (j.contains("marker_brightness")) {
    const auto mb = field<std::vector<int>>(j, "marker_brightness");
    if (mb.size() != 2) throw Error(ErrorCode::kParse, "marker_brightness must be [dark, light]");
    spec.dark = static_cast<std::uint8_t>(mb[0]);
    spec.light = static_cast<std::uint8_t>(mb[1]);
  }
  spec.noise_sigma = field_or<double>(j, "noise_sigma", 0.0);
  spec.seed = field_or<std::uint64_t>(j, "seed", 0);
  for (const auto& mj : field_or<Json>(j, "markers", Json::array())) {
    const int id = field<int>(mj, "id");
    const MarkerPattern* pattern = dict.find(id);
    if (!pattern) throw Error(ErrorCode::kNotFound, "marker " + std::to_string(id) + " is not in the dictionary");
    spec.placements.push_back({*pattern, pose_from_json(mj)});
  }
  return spec;
}

Json truth_to_json(const std::vector<GroundTruthMarker>& truth) {
  Json markers = Json::array();
  for (const auto& t : truth) {
    Json m = to_json(t.pose);
    m["id"] = t.id;
    Json corners = Json::array();
    for (const auto& c : t.corners) corners.push_back({c.x(), c.y()});
    m["corners_px"] = corners;
    markers.push_back(std::move(m));
  }
  return {{"markers", markers}};
}

}  // namespace stereomark
