#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace hoi {

enum class ErrorKind {
  kDimensionMismatch,
  kInvalidArgument,
  kSchema,
  kNonBinaryEdge,
  kOutOfRange,
  kDegenerateRotation,
  kNonFinite,
  kUnknownEntity,
  kMissingForce,
  kSimulationDiverged,
  kUnreachable,
  kNonFiniteLoss,
  kTrainingAborted,
  kIo,
};

const char* to_string(ErrorKind kind);

// Every failure in the library surfaces as hoi::Error. `index` carries the
// frame, step or keyframe number when the failure is tied to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<long> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<long> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<long> index_;
};

}  // namespace hoi
