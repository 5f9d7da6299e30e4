#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "splitaudit/log.hpp"
#include "splitaudit/time_util.hpp"

namespace splitaudit {

struct HistogramBin {
  double lower = 0;
  double upper = 0;
  std::uint64_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

inline constexpr std::array<double, 5> kQuantileLevels = {0.05, 0.25, 0.5, 0.75, 0.95};

// Empty samples yield count 0, zero moments and no bins.
struct DistributionSummary {
  std::uint64_t count = 0;
  double mean = 0;
  double min = 0;
  double max = 0;
  std::array<double, 5> quantiles{};  // at kQuantileLevels
  std::vector<HistogramBin> histogram;
  // Bins equal-width in log10(1 + x); filled for non-negative duration samples.
  std::vector<HistogramBin> log_histogram;

  double median() const { return quantiles[2]; }
  bool operator==(const DistributionSummary&) const = default;
};

// Linear interpolation between order statistics: position p * (n - 1).
double quantile_sorted(std::span<const double> sorted, double p);

// Freedman-Diaconis width capped at 100 bins; Sturges' rule when the IQR is 0.
std::vector<HistogramBin> linear_histogram(std::span<const double> sorted);
std::vector<HistogramBin> log_histogram(std::span<const double> sorted);

DistributionSummary summarize(std::vector<double> values, bool with_log_bins = false);

struct CoreStatsReport {
  std::uint64_t n_users = 0;
  std::uint64_t n_items = 0;
  std::uint64_t n_interactions = 0;
  double avg_seq_len = 0;
  double density_pct = 0;
  DistributionSummary popularity;  // per-item interaction counts
  DistributionSummary seq_len;     // per-user interaction counts

  bool operator==(const CoreStatsReport&) const = default;
};

inline constexpr const char* kCollisionDefinition =
    "percent of interactions whose timestamp equals that of another interaction of the same user";

struct TemporalStatsReport {
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
  Timestamp timeframe_ms = 0;
  DistributionSummary delta_t;  // ms between consecutive interactions of a user
  std::uint64_t colliding_interactions = 0;
  double collision_rate_pct = 0;
  DistributionSummary user_lifetime;  // ms
  DistributionSummary item_lifetime;  // ms
  std::string collision_definition = kCollisionDefinition;

  bool operator==(const TemporalStatsReport&) const = default;
};

struct RepeatReport {
  std::uint64_t n_interactions = 0;
  std::uint64_t repeated_count = 0;
  std::uint64_t consecutive_count = 0;
  double repeated_interactions_pct = 0;
  double consecutive_repeats_pct = 0;
  DistributionSummary per_user_repeat_share;  // percent of each user's interactions

  bool operator==(const RepeatReport&) const = default;
};

struct TimeRange {
  Timestamp start = 0;
  Timestamp end = 0;  // inclusive

  bool operator==(const TimeRange&) const = default;
};

struct TimelineBucket {
  Timestamp start = 0;
  std::uint64_t count = 0;

  bool operator==(const TimelineBucket&) const = default;
};

struct RoleTimeline {
  std::string role;
  std::vector<TimelineBucket> buckets;  // non-empty buckets only, ascending
  std::uint64_t in_range = 0;
  std::uint64_t excluded = 0;

  bool operator==(const RoleTimeline&) const = default;
};

struct TimelineReport {
  Granularity granularity = Granularity::kDay;
  TimeRange range;
  std::vector<RoleTimeline> roles;

  bool operator==(const TimelineReport&) const = default;
};

CoreStatsReport core_stats(const InteractionLog& log);
TemporalStatsReport temporal_stats(const InteractionLog& log);
RepeatReport repeat_stats(const InteractionLog& log);

struct NamedLog {
  std::string role;
  const InteractionLog* log = nullptr;
};

// Without a range, the span of all given interactions is used.
TimelineReport timeline(std::span<const NamedLog> logs, Granularity granularity,
                        std::optional<TimeRange> range = std::nullopt);

using StatsReport = std::variant<CoreStatsReport, TemporalStatsReport, RepeatReport>;

std::string_view stats_report_kind(const StatsReport& report);

struct ComparisonRow {
  std::string field;
  double analysed = 0;
  double reference = 0;
  std::optional<double> delta_pct;  // absent when reference is 0

  bool operator==(const ComparisonRow&) const = default;
};

struct ComparisonTable {
  std::string report_kind;
  std::vector<ComparisonRow> rows;

  bool operator==(const ComparisonTable&) const = default;
};

// Scalar fields of a report in a fixed order, distribution summaries expanded to
// mean/median/min/max.
std::vector<std::pair<std::string, double>> numeric_fields(const StatsReport& report);

// Throws kTypeMismatch when the two reports differ in kind.
ComparisonTable compare_stats(const StatsReport& analysed, const StatsReport& reference);

}  // namespace splitaudit
