#include "stereomark/scene.hpp"

#include <set>

#include "stereomark/error.hpp"

namespace stereomark {

void Scene::validate() const {
  anaglyph.validate();
  std::set<int> ids;
  for (const auto& b : bindings) {
    if (!(b.scale > 0.0)) {
      throw Error(ErrorCode::kInvalidParameter, "binding for marker " + std::to_string(b.marker_id) +
                                                    ": scale must be positive");
    }
    if (!ids.insert(b.marker_id).second) {
      throw Error(ErrorCode::kInvalidParameter, "marker " + std::to_string(b.marker_id) + " is bound twice");
    }
    if (!b.mesh) {
      throw Error(ErrorCode::kInvalidParameter, "binding for marker " + std::to_string(b.marker_id) + " has no mesh");
    }
    b.material.validate();
  }
}

const Binding* Scene::find(int marker_id) const {
  for (const auto& b : bindings) {
    if (b.marker_id == marker_id) return &b;
  }
  return nullptr;
}

std::vector<RenderObject> resolve(std::span<const DetectedMarker> detections, const Scene& scene,
                                  const PoseMap& poses) {
  std::vector<RenderObject> out;
  for (const auto& det : detections) {
    const Binding* binding = scene.find(det.pattern_id);
    if (!binding || !binding->mesh) continue;
    const auto pose = poses.find(det.pattern_id);
    if (pose == poses.end()) continue;
    RenderObject obj;
    obj.mesh = binding->scale == 1.0 ? binding->mesh : std::make_shared<const Mesh>(binding->mesh->scaled(binding->scale));
    obj.material = binding->material;
    obj.pose.rotation = pose->second.rotation;
    obj.pose.translation = pose->second.rotation * binding->translation + pose->second.translation;
    out.push_back(std::move(obj));
  }
  return out;
}

}  // namespace stereomark
