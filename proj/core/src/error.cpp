#include "constructa/error.hpp"

namespace constructa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kSingularCenter: return "SingularCenter";
    case ErrorCode::kTimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::kNonPositiveInput: return "NonPositiveInput";
    case ErrorCode::kMixedAnchors: return "MixedAnchors";
    case ErrorCode::kWrongDistribution: return "WrongDistribution";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kEmptyDomain: return "EmptyDomain";
    case ErrorCode::kPathologicalConfiguration: return "PathologicalConfiguration";
    case ErrorCode::kNoAmbiguity: return "NoAmbiguity";
    case ErrorCode::kMissingMeasurements: return "MissingMeasurements";
    case ErrorCode::kZeroRange: return "ZeroRange";
    case ErrorCode::kInconsistentControls: return "InconsistentControls";
    case ErrorCode::kDegeneratePrefix: return "DegeneratePrefix";
    case ErrorCode::kNoSolutionFound: return "NoSolutionFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace constructa
