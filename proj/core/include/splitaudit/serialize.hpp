#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "splitaudit/diagnostics.hpp"
#include "splitaudit/error.hpp"
#include "splitaudit/preprocess.hpp"
#include "splitaudit/report.hpp"
#include "splitaudit/split.hpp"
#include "splitaudit/stats.hpp"

namespace splitaudit {

using Document =
    std::variant<CoreStatsReport, TemporalStatsReport, RepeatReport, TimelineReport, ComparisonTable,
                 SplitDescription, LeakageReport, ColdStartReport, ShiftReport, SplitComparisonMatrix,
                 SummaryReport, AuditDetails, ThresholdConfig, SplitSpec, PreprocessSpec, Provenance>;

std::string_view document_kind(const Document& doc);

// {"schema_version": N, "kind": "...", "report": {...}}, pretty-printed with a
// fixed key order and a trailing newline. Durations stay in milliseconds.
std::string to_json(const Document& doc);

// Throws kSchemaVersionMismatch for another schema version and
// kMalformedDocument for anything else that is not a valid document.
Document from_json(std::string_view bytes);

template <typename T>
T from_json_as(std::string_view bytes) {
  Document doc = from_json(bytes);
  if (auto* v = std::get_if<T>(&doc)) return std::move(*v);
  throw Error(ErrorCode::kMalformedDocument,
              "expected a different document kind, got '" + std::string(document_kind(doc)) + "'");
}

}  // namespace splitaudit
