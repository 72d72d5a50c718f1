#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace constructa {

enum class ErrorCode {
  kParseError,
  kSchemaError,
  kSingularCenter,
  kTimeOutOfRange,
  kNonPositiveInput,
  kMixedAnchors,
  kWrongDistribution,
  kDegenerateInput,
  kEmptyDomain,
  kPathologicalConfiguration,
  kNoAmbiguity,
  kMissingMeasurements,
  kZeroRange,
  kInconsistentControls,
  kDegeneratePrefix,
  kNoSolutionFound,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to a diagnostic without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace constructa
