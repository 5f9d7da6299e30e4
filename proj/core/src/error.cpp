#include "splitaudit/error.hpp"

namespace splitaudit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kEmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kEmptyTargets: return "EmptyTargets";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
  }
  return "Unknown";
}

}  // namespace splitaudit
