#include "antiuav/error.hpp"

#include "json.hpp"

namespace antiuav {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::ObjectLeavesFrame: return "ObjectLeavesFrame";
    case ErrorCode::OverlappingSlices: return "OverlappingSlices";
    case ErrorCode::PrematureCommit: return "PrematureCommit";
    case ErrorCode::EmptyBox: return "EmptyBox";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::UnknownOpcode: return "UnknownOpcode";
    case ErrorCode::FieldOverflow: return "FieldOverflow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MalformedProgram: return "MalformedProgram";
    case ErrorCode::ModelShapeMismatch: return "ModelShapeMismatch";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, std::optional<std::size_t> location) {
  std::string out(to_string(code));
  if (location) out += "(" + std::to_string(*location) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::optional<std::size_t> location)
    : std::runtime_error(compose(code, message, location)), code_(code), location_(location) {}

std::string Error::to_json() const {
  nlohmann::ordered_json j;
  j["error"] = std::string(to_string(code_));
  if (location_) j["location"] = *location_;
  j["message"] = what();
  return j.dump();
}

}  // namespace antiuav
