#include "stereomark/error.hpp"

namespace stereomark {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid_parameter";
    case ErrorCode::kInvalidInput: return "invalid_input";
    case ErrorCode::kInvalidCandidate: return "invalid_candidate";
    case ErrorCode::kSingularSystem: return "singular_system";
    case ErrorCode::kPoseFailure: return "pose_failure";
    case ErrorCode::kLowQualityPose: return "low_quality_pose";
    case ErrorCode::kBehindCamera: return "behind_camera";
    case ErrorCode::kInvalidSpec: return "invalid_spec";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kNotFound: return "not_found";
  }
  return "unknown";
}

}  // namespace stereomark
