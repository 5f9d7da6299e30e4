#pragma once

// nlohmann/json bindings for the report types. Private to the build: the public
// surface is serialize.hpp.

#include <json.hpp>

#include "splitaudit/ingest.hpp"
#include "splitaudit/serialize.hpp"

namespace splitaudit {

using Json = nlohmann::ordered_json;

// Thrown by decoders for structurally valid JSON with invalid content.
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void to_json(Json& j, const HistogramBin& v);
void from_json(const Json& j, HistogramBin& v);
void to_json(Json& j, const DistributionSummary& v);
void from_json(const Json& j, DistributionSummary& v);
void to_json(Json& j, const CoreStatsReport& v);
void from_json(const Json& j, CoreStatsReport& v);
void to_json(Json& j, const TemporalStatsReport& v);
void from_json(const Json& j, TemporalStatsReport& v);
void to_json(Json& j, const RepeatReport& v);
void from_json(const Json& j, RepeatReport& v);
void to_json(Json& j, const TimeRange& v);
void from_json(const Json& j, TimeRange& v);
void to_json(Json& j, const TimelineReport& v);
void from_json(const Json& j, TimelineReport& v);
void to_json(Json& j, const ComparisonTable& v);
void from_json(const Json& j, ComparisonTable& v);
void to_json(Json& j, const RoleDescription& v);
void from_json(const Json& j, RoleDescription& v);
void to_json(Json& j, const SplitDescription& v);
void from_json(const Json& j, SplitDescription& v);
void to_json(Json& j, const TimeShareBucket& v);
void from_json(const Json& j, TimeShareBucket& v);
void to_json(Json& j, const LeakageReport& v);
void from_json(const Json& j, LeakageReport& v);
void to_json(Json& j, const ColdStartReport& v);
void from_json(const Json& j, ColdStartReport& v);
void to_json(Json& j, const ShiftReport& v);
void from_json(const Json& j, ShiftReport& v);
void to_json(Json& j, const SplitComparisonRow& v);
void from_json(const Json& j, SplitComparisonRow& v);
void to_json(Json& j, const SplitComparisonMatrix& v);
void from_json(const Json& j, SplitComparisonMatrix& v);
void to_json(Json& j, const Card& v);
void from_json(const Json& j, Card& v);
void to_json(Json& j, const SummaryReport& v);
void from_json(const Json& j, SummaryReport& v);
void to_json(Json& j, const AuditDetails& v);
void from_json(const Json& j, AuditDetails& v);
// Missing metrics keep their default levels.
void to_json(Json& j, const ThresholdConfig& v);
void from_json(const Json& j, ThresholdConfig& v);
void to_json(Json& j, const SplitSpec& v);
void from_json(const Json& j, SplitSpec& v);
void to_json(Json& j, const PreprocessSpec& v);
void from_json(const Json& j, PreprocessSpec& v);
void to_json(Json& j, const Provenance& v);
void from_json(const Json& j, Provenance& v);
void to_json(Json& j, const ColumnMapping& v);
void from_json(const Json& j, ColumnMapping& v);

// Envelope around a payload.
Json envelope(const Document& doc);
// Parses text with a nesting-depth guard; throws kMalformedDocument.
Json parse_json_text(std::string_view bytes);

}  // namespace splitaudit
