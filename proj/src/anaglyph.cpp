#include "stereomark/anaglyph.hpp"

#include "stereomark/error.hpp"

namespace stereomark {

void AnaglyphConfig::validate() const {
  for (int c = 0; c < 3; ++c) {
    if (left_mask[c] && right_mask[c]) {
      throw Error(ErrorCode::kInvalidParameter, "anaglyph masks must be disjoint");
    }
  }
  if (!(separation >= 0.0)) throw Error(ErrorCode::kInvalidParameter, "eye separation must be >= 0");
}

Frame composite(const Frame& frame, const RenderTarget& left, const RenderTarget& right, const AnaglyphConfig& cfg) {
  if (!frame.same_size(left.color) || (cfg.enabled && !frame.same_size(right.color))) {
    throw Error(ErrorCode::kInvalidInput, "frame and render targets differ in size");
  }
  cfg.validate();
  Frame out = frame;
  const std::size_t n = frame.size();
  if (!cfg.enabled) {
    for (std::size_t i = 0; i < n; ++i) {
      if (left.coverage[i]) out[i] = left.color[i];
    }
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool l = left.coverage[i] != 0;
    const bool r = right.coverage[i] != 0;
    if (!l && !r) continue;
    std::uint8_t* dst[3] = {&out[i].r, &out[i].g, &out[i].b};
    const std::uint8_t lc[3] = {left.color[i].r, left.color[i].g, left.color[i].b};
    const std::uint8_t rc[3] = {right.color[i].r, right.color[i].g, right.color[i].b};
    for (int c = 0; c < 3; ++c) {
      if (l && cfg.left_mask[c]) {
        *dst[c] = lc[c];
      } else if (r && cfg.right_mask[c]) {
        *dst[c] = rc[c];
      }
    }
  }
  return out;
}

}  // namespace stereomark
