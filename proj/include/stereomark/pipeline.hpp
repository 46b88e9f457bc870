#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stereomark/anaglyph.hpp"
#include "stereomark/camera.hpp"
#include "stereomark/image.hpp"
#include "stereomark/imaging.hpp"
#include "stereomark/marker.hpp"
#include "stereomark/pose.hpp"
#include "stereomark/renderer.hpp"
#include "stereomark/scene.hpp"

namespace stereomark {

struct PipelineParams {
  ThresholdParams threshold;
  QuadParams quads;
  RefineParams refine;
  DecodeParams decode;
  PoseParams pose;
  RenderParams render;
};

// Named stage durations in execution order.
using StageTimings = std::vector<std::pair<std::string, double>>;

struct PipelineResult {
  Frame augmented;
  std::vector<DetectedMarker> detections;
  PoseMap poses;  // keys are a subset of the detection ids
  StageTimings timings_ms;
  double total_ms = 0.0;
  // Left eye (or the centre view when the anaglyph is disabled) and right eye.
  RenderTarget left;
  RenderTarget right;
};

// Detections only: grayscale -> binarize -> quads -> refine -> decode. One
// detection per marker id (highest confidence, then largest area).
std::vector<DetectedMarker> detect_markers(const GrayImage& gray, const MarkerDictionary& dict,
                                           const PipelineParams& params = {}, StageTimings* timings = nullptr);

// Full frame: detection, pose, scene resolution, per-eye render and
// composite. Per-marker failures drop that marker's pose; configuration
// errors (frame size vs. camera, invalid scene) throw.
PipelineResult process_frame(const Frame& frame, const Scene& scene, const MarkerDictionary& dict,
                             const CameraIntrinsics& cam, const PipelineParams& params = {});

}  // namespace stereomark
