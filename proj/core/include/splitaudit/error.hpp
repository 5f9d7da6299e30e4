#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splitaudit {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kMissingColumn,
  kMalformedRow,
  kEmptyLog,
  kDegenerateSplit,
  kEmptyEvaluation,
  kInvalidRange,
  kTypeMismatch,
  kEmptySample,
  kEmptyTargets,
  kEmptyReference,
  kProvenanceMismatch,
  kSchemaVersionMismatch,
  kMalformedDocument,
};

// Stable machine-readable name, used in CLI messages and API error bodies.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace splitaudit
