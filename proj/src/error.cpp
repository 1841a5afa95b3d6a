#include "carfollow/error.hpp"

namespace carfollow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCrash: return "CRASH";
    case ErrorCode::kStepMismatch: return "STEP_MISMATCH";
    case ErrorCode::kGridMismatch: return "GRID_MISMATCH";
    case ErrorCode::kInsufficientPoints: return "INSUFFICIENT_POINTS";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace carfollow
