#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stereomark {

// Machine-readable error categories. The service maps these onto HTTP status
// codes and the "code" field of its error body.
enum class ErrorCode {
  kInvalidParameter,
  kInvalidInput,
  kInvalidCandidate,
  kSingularSystem,
  kPoseFailure,
  kLowQualityPose,
  kBehindCamera,
  kInvalidSpec,
  kIo,
  kParse,
  kNotFound,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stereomark
