#include "stereomark/pipeline.hpp"

#include <chrono>
#include <map>

#include "stereomark/error.hpp"

namespace stereomark {
namespace {

class StageClock {
 public:
  explicit StageClock(StageTimings* out) : out_(out), last_(Clock::now()) {}

  void lap(const char* stage) {
    const auto now = Clock::now();
    if (out_) out_->emplace_back(stage, std::chrono::duration<double, std::milli>(now - last_).count());
    last_ = now;
  }

 private:
  using Clock = std::chrono::steady_clock;
  StageTimings* out_;
  Clock::time_point last_;
};

}  // namespace

std::vector<DetectedMarker> detect_markers(const GrayImage& gray, const MarkerDictionary& dict,
                                           const PipelineParams& params, StageTimings* timings) {
  StageClock clock(timings);
  const BinaryImage bin = binarize(gray, params.threshold);
  clock.lap("binarize");
  const auto quads = find_quads(bin, params.quads);
  clock.lap("find_quads");
  std::vector<QuadCandidate> refined;
  refined.reserve(quads.size());
  for (const auto& q : quads) refined.push_back(refine_corners(gray, q, params.refine));
  clock.lap("refine_corners");

  std::vector<DetectedMarker> detections;
  std::vector<double> areas;
  std::map<int, std::size_t> by_id;
  for (const auto& q : refined) {
    std::optional<DetectedMarker> det;
    try {
      det = decode(gray, q, dict, params.decode);
    } catch (const Error&) {
      continue;
    }
    if (!det) continue;
    const auto it = by_id.find(det->pattern_id);
    if (it == by_id.end()) {
      by_id.emplace(det->pattern_id, detections.size());
      detections.push_back(*det);
      areas.push_back(q.area);
    } else {
      const std::size_t i = it->second;
      if (det->confidence > detections[i].confidence ||
          (det->confidence == detections[i].confidence && q.area > areas[i])) {
        detections[i] = *det;
        areas[i] = q.area;
      }
    }
  }
  clock.lap("decode");
  return detections;
}

PipelineResult process_frame(const Frame& frame, const Scene& scene, const MarkerDictionary& dict,
                             const CameraIntrinsics& cam, const PipelineParams& params) {
  cam.validate();
  scene.validate();
  if (frame.width() != cam.width || frame.height() != cam.height) {
    throw Error(ErrorCode::kInvalidInput, "frame is " + std::to_string(frame.width()) + "x" +
                                              std::to_string(frame.height()) + " but the camera is " +
                                              std::to_string(cam.width) + "x" + std::to_string(cam.height));
  }
  const auto start = std::chrono::steady_clock::now();
  PipelineResult result;
  StageClock clock(&result.timings_ms);

  const GrayImage gray = to_grayscale(frame);
  clock.lap("grayscale");
  result.detections = detect_markers(gray, dict, params, &result.timings_ms);
  clock = StageClock(&result.timings_ms);

  for (const auto& det : result.detections) {
    const MarkerPattern* pattern = dict.find(det.pattern_id);
    if (!pattern) continue;
    try {
      result.poses.emplace(det.pattern_id, pose_from_marker(det, *pattern, cam, params.pose));
    } catch (const Error&) {
      // Skipped: the marker stays in the detection list without a pose.
    }
  }
  clock.lap("pose");

  const auto objects = resolve(result.detections, scene, result.poses);
  clock.lap("resolve");

  if (scene.anaglyph.enabled) {
    auto eye_objects = [&](EyeSide side) {
      auto out = objects;
      for (auto& o : out) o.pose = eye_offset(o.pose, side, scene.anaglyph.separation);
      return out;
    };
    result.left = render(eye_objects(EyeSide::kLeft), cam, params.render);
    result.right = render(eye_objects(EyeSide::kRight), cam, params.render);
  } else {
    result.left = render(objects, cam, params.render);
    result.right = RenderTarget(cam.width, cam.height);
  }
  clock.lap("render");

  result.augmented = composite(frame, result.left, result.right, scene.anaglyph);
  clock.lap("composite");
  result.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace stereomark
