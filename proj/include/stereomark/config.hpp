#pragma once

#include <filesystem>
#include <memory>

#include "json.hpp"

#include "stereomark/camera.hpp"
#include "stereomark/marker.hpp"
#include "stereomark/scene.hpp"
#include "stereomark/synth.hpp"

namespace stereomark {

using Json = nlohmann::json;

// Dictionary file: {"grid_size", "min_hamming", "patterns": [{"id",
// "physical_width_m", "center_offset_m", "rows"}]}.
MarkerDictionary dictionary_from_json(const Json& j);
Json to_json(const MarkerDictionary& dict);
MarkerDictionary load_dictionary(const std::filesystem::path& path);

// Intrinsics file: {"fx", "fy", "cx", "cy", "width", "height"}.
CameraIntrinsics intrinsics_from_json(const Json& j);
Json to_json(const CameraIntrinsics& cam);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);

Json to_json(const Pose& pose);
Pose pose_from_json(const Json& j);
Json to_json(const DetectedMarker& det);
Json to_json(const ValidationReport& report);

// A scene together with the dictionary and camera it refers to. This is the
// unit the service swaps atomically.
struct SceneBundle {
  Scene scene;
  MarkerDictionary dictionary;
  CameraIntrinsics intrinsics;
};

// Scene file: {"intrinsics": path|object, "dictionary": path|object,
// "anaglyph": {"enabled", "separation_m", "left_mask", "right_mask"},
// "bindings": [{"marker_id", "mesh", "texture", "diffuse", "ambient",
// "translation_m", "scale"}]}. Relative paths resolve against base_dir;
// meshes named "builtin:*" come from the sample generators.
SceneBundle scene_bundle_from_json(const Json& j, const std::filesystem::path& base_dir);
SceneBundle load_scene_bundle(const std::filesystem::path& path);
Json to_json(const Scene& scene);
// Scene JSON with the dictionary and intrinsics references kept as given.
Json bundle_to_json(const SceneBundle& bundle);

// Synth spec file: {"intrinsics": path|object, "dictionary": path|object,
// "background": [r,g,b], "background_image": path, "marker_brightness":
// [dark, light], "noise_sigma", "seed", "markers": [{"id", "rotation": [9
// row-major], "translation": [3]}]}.
SynthSpec synth_spec_from_json(const Json& j, const std::filesystem::path& base_dir);
Json truth_to_json(const std::vector<GroundTruthMarker>& truth);

Json read_json_file(const std::filesystem::path& path);

}  // namespace stereomark
