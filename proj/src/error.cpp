#include "hoi/error.hpp"

namespace hoi {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kNonBinaryEdge: return "non_binary_edge";
    case ErrorKind::kOutOfRange: return "out_of_range";
    case ErrorKind::kDegenerateRotation: return "degenerate_rotation";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kUnknownEntity: return "unknown_entity";
    case ErrorKind::kMissingForce: return "missing_force";
    case ErrorKind::kSimulationDiverged: return "simulation_diverged";
    case ErrorKind::kUnreachable: return "unreachable";
    case ErrorKind::kNonFiniteLoss: return "non_finite_loss";
    case ErrorKind::kTrainingAborted: return "training_aborted";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

static std::string format_message(ErrorKind kind, const std::string& message,
                                  std::optional<long> index) {
  std::string out = std::string(to_string(kind)) + ": " + message;
  if (index) out += " (index " + std::to_string(*index) + ")";
  return out;
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<long> index)
    : std::runtime_error(format_message(kind, message, index)),
      kind_(kind),
      index_(index) {}

}  // namespace hoi
