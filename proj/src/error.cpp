#include "cello/error.hpp"

namespace cello {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::NotIntersecting: return "NotIntersecting";
    case ErrorCode::DegenerateHand: return "DegenerateHand";
    case ErrorCode::DegeneratePose: return "DegeneratePose";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::ModelShapeMismatch: return "ModelShapeMismatch";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::StoreUnavailable: return "StoreUnavailable";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace cello
