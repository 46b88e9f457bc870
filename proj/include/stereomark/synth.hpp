#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stereomark/camera.hpp"
#include "stereomark/image.hpp"
#include "stereomark/marker.hpp"
#include "stereomark/pose.hpp"

namespace stereomark {

struct SynthPlacement {
  MarkerPattern pattern;
  Pose pose;  // camera-from-marker
};

struct SynthSpec {
  CameraIntrinsics cam;
  std::vector<SynthPlacement> placements;
  Rgb background{190, 190, 190};
  std::shared_ptr<const Frame> background_image;  // overrides `background` when set
  std::uint8_t dark = 20;
  std::uint8_t light = 235;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct GroundTruthMarker {
  int id = 0;
  Pose pose;
  Quad corners;  // pattern TL, BL, BR, TR
};

struct SynthResult {
  Frame frame;
  std::vector<GroundTruthMarker> truth;
};

// Ray-casts every pixel onto each marker plane. Pixels whose footprint
// straddles a cell or marker boundary are box filtered with 4x4 sub-samples.
// Throws kInvalidSpec when a marker faces away from the camera, leaves the
// image, or the intensities/noise are out of range.
SynthResult render_synthetic(const SynthSpec& spec);

}  // namespace stereomark
