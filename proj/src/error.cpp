#include "echobeat/error.hpp"

namespace echobeat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingKeypoint: return "MissingKeypoint";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyChannel: return "EmptyChannel";
    case ErrorCode::AllGaps: return "AllGaps";
    case ErrorCode::NoBeatsDetected: return "NoBeatsDetected";
    case ErrorCode::EmptyBeats: return "EmptyBeats";
    case ErrorCode::InsufficientBeats: return "InsufficientBeats";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::BootstrapDegenerate: return "BootstrapDegenerate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidExtent: return "InvalidExtent";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace echobeat
