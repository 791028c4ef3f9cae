#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace antiuav {

enum class ErrorCode {
  MalformedLine,
  OutOfBounds,
  NonMonotonicTime,
  ObjectLeavesFrame,
  OverlappingSlices,
  PrematureCommit,
  EmptyBox,
  TooFewPoints,
  UnknownOpcode,
  FieldOverflow,
  ShapeMismatch,
  MalformedProgram,
  ModelShapeMismatch,
  MalformedModel,
  NoGroundTruth,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every module reports failures through this one exception type. `location`
// carries a line number, instruction index or similar when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::optional<std::size_t> location = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> location() const noexcept { return location_; }

  // {"error": "...", "location": n, "message": "..."}
  std::string to_json() const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> location_;
};

}  // namespace antiuav
