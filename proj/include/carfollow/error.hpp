#pragma once

#include <stdexcept>
#include <string>

namespace carfollow {

enum class ErrorCode {
  kCrash,               // a bumper-to-bumper gap became non-positive
  kStepMismatch,        // recording interval is not an integer multiple of h
  kGridMismatch,        // two trajectory records use different sample grids
  kInsufficientPoints,  // order fit needs at least three usable points
  kInvalidArgument,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace carfollow
