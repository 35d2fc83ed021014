#include "mflab/error.hpp"

namespace mflab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Leakage: return "LEAKAGE";
    case ErrorCode::Resolution: return "RESOLUTION";
    case ErrorCode::Unstable: return "UNSTABLE";
    case ErrorCode::Dimension: return "DIMENSION";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace mflab
