#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "splitaudit/log.hpp"

namespace splitaudit {

enum class Granularity { kHour, kDay, kWeek, kMonth };

std::string_view granularity_name(Granularity g);
std::optional<Granularity> granularity_from_name(std::string_view name);

// Start of the UTC calendar bucket containing `ts`. Weeks start on Monday.
Timestamp bucket_floor(Timestamp ts, Granularity g);
// Start of the bucket following the one starting at `bucket_start`.
Timestamp bucket_next(Timestamp bucket_start, Granularity g);

// YYYY-MM-DD[(T| )HH:MM[:SS[.fff...]]][Z|(+|-)HH[:]MM]. No zone means UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);
// YYYY-MM-DDTHH:MM:SS.mmmZ
std::string format_iso8601(Timestamp ts);

// Human-readable duration with an adaptive unit, e.g. "13.85 h", "0.00 s".
std::string format_duration(double millis);

}  // namespace splitaudit
