#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stereomark/anaglyph.hpp"
#include "stereomark/marker.hpp"
#include "stereomark/pose.hpp"
#include "stereomark/renderer.hpp"

namespace stereomark {

// One object anchored to one marker. `translation` is expressed in marker
// coordinates (Z points away from the viewer of a front-facing marker, so
// lifting an object off the marker means negative z). `scale` applies to the
// mesh geometry before placement.
struct Binding {
  int marker_id = 0;
  std::string mesh_ref;
  std::string texture_ref;
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  std::shared_ptr<const Mesh> mesh;
  Material material;
};

struct Scene {
  std::vector<Binding> bindings;
  AnaglyphConfig anaglyph;
  std::string intrinsics_ref;
  std::string dictionary_ref;

  // Throws kInvalidParameter on non-positive scale, duplicate marker ids,
  // missing meshes or an invalid anaglyph config.
  void validate() const;
  const Binding* find(int marker_id) const;
};

using PoseMap = std::map<int, Pose>;

// Object-to-camera placements for detections that have both a binding and a
// pose, in detection order: rotation = marker rotation,
// translation = R * binding.translation + t, mesh pre-scaled.
std::vector<RenderObject> resolve(std::span<const DetectedMarker> detections, const Scene& scene,
                                  const PoseMap& poses);

}  // namespace stereomark
