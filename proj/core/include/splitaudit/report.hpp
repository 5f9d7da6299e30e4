#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitaudit/diagnostics.hpp"
#include "splitaudit/split.hpp"
#include "splitaudit/stats.hpp"

namespace splitaudit {

enum class Metric {
  kCollisionRatePct,
  kConsecutiveRepeatsPct,
  kLeakedTargetPct,
  kColdUsersPct,
  kColdItemsPct,
  kTimegapKs,
  kPositionKs,
  kMinEvalUsers,
  kMinEvalInteractions,
};

inline constexpr std::size_t kMetricCount = 9;

enum class Direction { kHighIsBad, kLowIsBad };

struct MetricInfo {
  Metric metric;
  std::string_view name;
  Direction direction;
  std::string_view page;  // detail page the card links to
};

// Card order.
const std::array<MetricInfo, kMetricCount>& metric_table();
const MetricInfo& metric_info(Metric m);
std::optional<Metric> metric_from_name(std::string_view name);

struct Threshold {
  double warn = 0;
  double alert = 0;

  bool operator==(const Threshold&) const = default;
};

struct ThresholdConfig {
  std::array<Threshold, kMetricCount> levels{};

  Threshold& operator[](Metric m) { return levels[static_cast<std::size_t>(m)]; }
  const Threshold& operator[](Metric m) const { return levels[static_cast<std::size_t>(m)]; }

  // warn <= alert for high-is-bad metrics, warn >= alert for low-is-bad ones.
  void validate() const;
  static ThresholdConfig defaults();

  bool operator==(const ThresholdConfig&) const = default;
};

enum class CardStatus { kOk, kWarn, kAlert, kNotApplicable };

std::string_view card_status_name(CardStatus s);
std::optional<CardStatus> card_status_from_name(std::string_view name);

// High-is-bad: alert when value >= alert, warn when value >= warn.
// Low-is-bad: alert when value < alert, warn when value < warn.
CardStatus evaluate_status(Metric metric, std::optional<double> value, const ThresholdConfig& thresholds);

struct Card {
  std::string metric;
  std::optional<double> value;
  CardStatus status = CardStatus::kNotApplicable;
  std::string link;

  bool operator==(const Card&) const = default;
};

struct SummaryReport {
  std::string dataset;
  std::optional<Provenance> provenance;
  std::optional<SplitSpec> split;
  std::string toolkit_version;
  // Null unless supplied (e.g. from SOURCE_DATE_EPOCH), keeping output reproducible.
  std::optional<std::string> generated_at;
  std::vector<Card> cards;
  std::vector<std::string> notes;

  bool operator==(const SummaryReport&) const = default;
};

// Everything one audit run can produce. Split-side entries are per evaluation side.
struct AuditDetails {
  std::optional<CoreStatsReport> core;
  std::optional<TemporalStatsReport> temporal;
  std::optional<RepeatReport> repeats;
  std::optional<ComparisonTable> core_vs_reference;
  std::optional<SplitDescription> split;
  std::vector<LeakageReport> leakage;
  std::vector<ColdStartReport> cold_start;
  std::vector<ShiftReport> shift;
  std::optional<SplitComparisonMatrix> comparison;

  bool empty() const;
  bool operator==(const AuditDetails&) const = default;
};

struct AuditOptions {
  Granularity granularity = Granularity::kDay;
  // Compared against by core_vs_reference and used by shift; defaults to the source.
  const InteractionLog* reference = nullptr;
};

// Dataset statistics of `source`, plus split diagnostics for both evaluation
// sides when a bundle is given. Shift is skipped for sides with no targets.
AuditDetails run_audit(const InteractionLog& source, const SplitBundle* bundle, const AuditOptions& options = {});

struct SummaryIdentity {
  std::string dataset;
  std::optional<Provenance> provenance;
  std::optional<SplitSpec> split;
  std::optional<std::string> generated_at;
};

// One card per metric in metric_table() order. Leakage, cold-start and shift
// cards read the test side; min_eval_* take the smaller of the two target subsets.
SummaryReport summarize(const AuditDetails& details, const ThresholdConfig& thresholds,
                        const SummaryIdentity& identity = {});

// Highest severity among the cards (not_applicable counts as ok).
CardStatus worst_status(const SummaryReport& summary);

std::string render_markdown(const SummaryReport& summary, const AuditDetails& details);

std::string render_comparison_text(const SplitComparisonMatrix& matrix);
std::string render_comparison_markdown(const SplitComparisonMatrix& matrix);

// Fixed 4-decimal rendering used across text outputs.
std::string format_value(double v);

}  // namespace splitaudit
