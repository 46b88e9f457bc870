#pragma once

#include <array>

#include "stereomark/image.hpp"
#include "stereomark/renderer.hpp"

namespace stereomark {

using ChannelMask = std::array<bool, 3>;  // R, G, B

struct AnaglyphConfig {
  bool enabled = true;
  double separation = 0.06;                   // meters
  ChannelMask left_mask = {true, false, false};
  ChannelMask right_mask = {false, true, true};

  // Throws kInvalidParameter when a channel is written by both eyes or the
  // separation is negative.
  void validate() const;
};

// Enabled: per channel, left colour where the left mask is set and the left
// eye covers the pixel, else right colour where the right mask is set and the
// right eye covers it, else the camera frame.
// Disabled: `left` is the single centre-eye target, composited over the
// frame on all channels wherever it covers; `right` is ignored.
// Throws kInvalidInput on dimension mismatch.
Frame composite(const Frame& frame, const RenderTarget& left, const RenderTarget& right, const AnaglyphConfig& cfg);

}  // namespace stereomark
