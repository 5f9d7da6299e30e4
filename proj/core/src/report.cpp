#include "splitaudit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "splitaudit/error.hpp"
#include "splitaudit/time_util.hpp"
#include "splitaudit/version.hpp"

namespace splitaudit {

namespace {

constexpr std::array<MetricInfo, kMetricCount> kMetrics = {{
    {Metric::kCollisionRatePct, "collision_rate_pct", Direction::kHighIsBad, "core_temporal"},
    {Metric::kConsecutiveRepeatsPct, "consecutive_repeats_pct", Direction::kHighIsBad, "repeats"},
    {Metric::kLeakedTargetPct, "leaked_target_pct", Direction::kHighIsBad, "leakage"},
    {Metric::kColdUsersPct, "cold_users_pct", Direction::kHighIsBad, "cold_start"},
    {Metric::kColdItemsPct, "cold_items_pct", Direction::kHighIsBad, "cold_start"},
    {Metric::kTimegapKs, "timegap_ks", Direction::kHighIsBad, "shift"},
    {Metric::kPositionKs, "position_ks", Direction::kHighIsBad, "shift"},
    {Metric::kMinEvalUsers, "min_eval_users", Direction::kLowIsBad, "split"},
    {Metric::kMinEvalInteractions, "min_eval_interactions", Direction::kLowIsBad, "split"},
}};

template <typename Report>
const Report* find_side(const std::vector<Report>& reports, EvalSide side) {
  for (const auto& r : reports) {
    if (r.eval_side == side) return &r;
  }
  return nullptr;
}

std::string cell(std::optional<double> v) { return v ? format_value(*v) : "n/a"; }

std::string count(std::uint64_t v) { return std::to_string(v); }

std::string ts_cell(std::optional<Timestamp> ts) { return ts ? format_iso8601(*ts) : "n/a"; }

void table_header(std::ostringstream& out, std::initializer_list<std::string_view> cols) {
  out << '|';
  for (auto c : cols) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
  out << '\n';
}

void table_row(std::ostringstream& out, std::initializer_list<std::string> cells) {
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void anchor(std::ostringstream& out, std::string_view id, std::string_view title) {
  out << "\n<a id=\"" << id << "\"></a>\n\n## " << title << "\n\n";
}

void distribution_rows(std::ostringstream& out, std::string_view name, const DistributionSummary& d,
                       bool duration) {
  auto fmt = [duration](double v) { return duration ? format_duration(v) : format_value(v); };
  table_row(out, {std::string(name), count(d.count), fmt(d.mean), fmt(d.min), fmt(d.quantiles[0]),
                  fmt(d.quantiles[1]), fmt(d.quantiles[2]), fmt(d.quantiles[3]), fmt(d.quantiles[4]),
                  fmt(d.max)});
}

void distribution_header(std::ostringstream& out) {
  table_header(out, {"Distribution", "Count", "Mean", "Min", "Q05", "Q25", "Median", "Q75", "Q95", "Max"});
}

constexpr std::size_t kMaxSeriesRows = 60;

void share_series(std::ostringstream& out, std::string_view label,
                  const std::vector<TimeShareBucket>& series, Granularity g) {
  out << "\n" << label << " per " << granularity_name(g) << ": " << series.size() << " buckets";
  if (series.size() > kMaxSeriesRows) {
    out << " (full series in the JSON report).\n";
    return;
  }
  out << ".\n\n";
  table_header(out, {"Bucket start", "Targets", "Flagged", "Share (%)"});
  for (const auto& b : series) {
    table_row(out, {format_iso8601(b.start), count(b.targets), count(b.flagged), format_value(b.share_pct)});
  }
}

std::string spec_label(const SplitSpec& spec) {
  if (spec.strategy == SplitStrategy::kLeaveOneOut) return "loo";
  char buf[64];
  std::snprintf(buf, sizeof buf, "gts(%g,%g,%s)", spec.q_val, spec.q_test,
                spec.target_mode == TargetMode::kLastItem ? "last" : "all");
  return buf;
}

std::vector<std::vector<std::string>> comparison_cells(const SplitComparisonMatrix& m) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"split", "strategy", "train", "test users", "test targets", "no-input users", "overlap %",
                  "leaked %", "item-leaked %", "shared", "cold users %", "cold items %", "cold targets %",
                  "gap KS", "position KS"});
  for (const auto& r : m.rows) {
    const auto& roles = r.description.roles;
    std::optional<double> gap_ks, pos_ks;
    if (r.shift) {
      gap_ks = r.shift->timegap_ks;
      pos_ks = r.shift->position_ks;
    }
    rows.push_back({r.name, spec_label(r.spec), count(roles[0].n_interactions), count(roles[4].n_users),
                    count(roles[4].n_interactions), count(r.description.test_users_without_input),
                    format_value(r.leakage.overlap_pct), format_value(r.leakage.leaked_target_pct),
                    format_value(r.leakage.leaked_item_target_pct), count(r.leakage.shared_interactions),
                    format_value(r.cold_start.cold_users_pct), format_value(r.cold_start.cold_items_pct),
                    format_value(r.cold_start.cold_interactions_pct), cell(gap_ks), cell(pos_ks)});
  }
  return rows;
}

}  // namespace

const std::array<MetricInfo, kMetricCount>& metric_table() { return kMetrics; }

const MetricInfo& metric_info(Metric m) { return kMetrics[static_cast<std::size_t>(m)]; }

std::optional<Metric> metric_from_name(std::string_view name) {
  for (const auto& info : kMetrics) {
    if (info.name == name) return info.metric;
  }
  return std::nullopt;
}

void ThresholdConfig::validate() const {
  for (const auto& info : kMetrics) {
    const Threshold& t = (*this)[info.metric];
    const bool ok = info.direction == Direction::kHighIsBad ? t.warn <= t.alert : t.warn >= t.alert;
    if (!ok) {
      throw Error(ErrorCode::kInvalidArgument,
                  "threshold '" + std::string(info.name) + "' has warn/alert levels in the wrong order");
    }
  }
}

ThresholdConfig ThresholdConfig::defaults() {
  ThresholdConfig c;
  c[Metric::kCollisionRatePct] = {1, 20};
  c[Metric::kConsecutiveRepeatsPct] = {1, 10};
  c[Metric::kLeakedTargetPct] = {0.1, 5};
  c[Metric::kColdUsersPct] = {10, 50};
  c[Metric::kColdItemsPct] = {5, 25};
  c[Metric::kTimegapKs] = {0.1, 0.3};
  c[Metric::kPositionKs] = {0.1, 0.3};
  c[Metric::kMinEvalUsers] = {1000, 100};
  c[Metric::kMinEvalInteractions] = {1000, 100};
  return c;
}

std::string_view card_status_name(CardStatus s) {
  switch (s) {
    case CardStatus::kOk: return "ok";
    case CardStatus::kWarn: return "warn";
    case CardStatus::kAlert: return "alert";
    case CardStatus::kNotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

std::optional<CardStatus> card_status_from_name(std::string_view name) {
  for (CardStatus s : {CardStatus::kOk, CardStatus::kWarn, CardStatus::kAlert, CardStatus::kNotApplicable}) {
    if (card_status_name(s) == name) return s;
  }
  return std::nullopt;
}

CardStatus evaluate_status(Metric metric, std::optional<double> value, const ThresholdConfig& thresholds) {
  if (!value) return CardStatus::kNotApplicable;
  const Threshold& t = thresholds[metric];
  if (metric_info(metric).direction == Direction::kHighIsBad) {
    if (*value >= t.alert) return CardStatus::kAlert;
    if (*value >= t.warn) return CardStatus::kWarn;
    return CardStatus::kOk;
  }
  if (*value < t.alert) return CardStatus::kAlert;
  if (*value < t.warn) return CardStatus::kWarn;
  return CardStatus::kOk;
}

bool AuditDetails::empty() const {
  return !core && !temporal && !repeats && !core_vs_reference && !split && leakage.empty() &&
         cold_start.empty() && shift.empty() && !comparison;
}

AuditDetails run_audit(const InteractionLog& source, const SplitBundle* bundle, const AuditOptions& options) {
  AuditDetails d;
  d.core = core_stats(source);
  d.temporal = temporal_stats(source);
  d.repeats = repeat_stats(source);
  if (options.reference) d.core_vs_reference = compare_stats(*d.core, core_stats(*options.reference));
  if (!bundle) return d;
  const InteractionLog& reference = options.reference ? *options.reference : source;
  d.split = describe_split(*bundle);
  for (EvalSide side : {EvalSide::kValidation, EvalSide::kTest}) {
    d.leakage.push_back(leakage(*bundle, side, options.granularity));
    d.cold_start.push_back(cold_start(*bundle, side, options.granularity));
    if (!bundle->target(side).empty()) d.shift.push_back(distribution_shift(*bundle, reference, side));
  }
  return d;
}

SummaryReport summarize(const AuditDetails& details, const ThresholdConfig& thresholds,
                        const SummaryIdentity& identity) {
  SummaryReport s;
  s.dataset = identity.dataset;
  s.provenance = identity.provenance;
  s.split = identity.split;
  s.toolkit_version = kToolkitVersion;
  s.generated_at = identity.generated_at;

  const auto* leak = find_side(details.leakage, EvalSide::kTest);
  const auto* cold = find_side(details.cold_start, EvalSide::kTest);
  const auto* shift = find_side(details.shift, EvalSide::kTest);

  for (const auto& info : kMetrics) {
    std::optional<double> value;
    switch (info.metric) {
      case Metric::kCollisionRatePct:
        if (details.temporal) value = details.temporal->collision_rate_pct;
        break;
      case Metric::kConsecutiveRepeatsPct:
        if (details.repeats) value = details.repeats->consecutive_repeats_pct;
        break;
      case Metric::kLeakedTargetPct:
        if (leak && !leak->empty_target) value = leak->leaked_target_pct;
        break;
      case Metric::kColdUsersPct:
        if (cold && cold->n_targets > 0) value = cold->cold_users_pct;
        break;
      case Metric::kColdItemsPct:
        if (cold && cold->n_targets > 0) value = cold->cold_items_pct;
        break;
      case Metric::kTimegapKs:
        if (shift) value = shift->timegap_ks;
        break;
      case Metric::kPositionKs:
        if (shift) value = shift->position_ks;
        break;
      case Metric::kMinEvalUsers:
        if (details.split) {
          value = static_cast<double>(std::min(details.split->roles[2].n_users, details.split->roles[4].n_users));
        }
        break;
      case Metric::kMinEvalInteractions:
        if (details.split) {
          value = static_cast<double>(
              std::min(details.split->roles[2].n_interactions, details.split->roles[4].n_interactions));
        }
        break;
    }
    s.cards.push_back({std::string(info.name), value, evaluate_status(info.metric, value, thresholds),
                       std::string(info.page)});
  }

  if (details.temporal) s.notes.push_back(std::string("collision rate: ") + kCollisionDefinition);
  if (identity.provenance && identity.provenance->preprocessing.n_core) {
    s.notes.push_back("n-core filtering counts interactions per user and item, not distinct partners");
  }
  if (details.split) {
    s.notes.push_back("leakage, cold-start and shift cards read the test side; min_eval cards take the smaller of the "
        "validation and test targets; validation inputs use only the training period");
  }
  if (leak) {
    s.notes.push_back(
        "leaked targets: timestamp strictly earlier than the latest training timestamp; shared interactions "
        "and overlap are measured on the target subset");
  }
  return s;
}

CardStatus worst_status(const SummaryReport& summary) {
  CardStatus worst = CardStatus::kOk;
  for (const auto& c : summary.cards) {
    if (c.status == CardStatus::kAlert) return CardStatus::kAlert;
    if (c.status == CardStatus::kWarn) worst = CardStatus::kWarn;
  }
  return worst;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string render_markdown(const SummaryReport& summary, const AuditDetails& details) {
  std::ostringstream out;
  out << "# Split audit: " << (summary.dataset.empty() ? "unnamed dataset" : summary.dataset) << "\n\n";
  out << "Toolkit version " << summary.toolkit_version << ". Generated: "
      << summary.generated_at.value_or("unspecified") << ".\n";
  if (summary.provenance) {
    out << "\nSource `" << summary.provenance->source_name << "` (fingerprint "
        << summary.provenance->source_id << ").\n";
  }
  if (summary.split) out << "\nSplit: `" << spec_label(*summary.split) << "`.\n";

  out << "\n## Summary\n\n";
  table_header(out, {"Metric", "Value", "Status", "Details"});
  for (const auto& c : summary.cards) {
    table_row(out, {c.metric, cell(c.value), std::string(card_status_name(c.status)),
                    "[" + c.link + "](#" + c.link + ")"});
  }
  if (!summary.notes.empty()) {
    out << "\nNotes:\n\n";
    for (const auto& n : summary.notes) out << "- " << n << '\n';
  }

  if (details.core || details.temporal) {
    anchor(out, "core_temporal", "Core and temporal statistics");
    if (details.core) {
      const auto& c = *details.core;
      table_header(out, {"Statistic", "Value"});
      table_row(out, {"Users", count(c.n_users)});
      table_row(out, {"Items", count(c.n_items)});
      table_row(out, {"Interactions", count(c.n_interactions)});
      table_row(out, {"Average sequence length", format_value(c.avg_seq_len)});
      table_row(out, {"Density (%)", format_value(c.density_pct)});
      out << '\n';
    }
    if (details.temporal) {
      const auto& t = *details.temporal;
      table_header(out, {"Temporal statistic", "Value"});
      table_row(out, {"Start", format_iso8601(t.start_ts)});
      table_row(out, {"End", format_iso8601(t.end_ts)});
      table_row(out, {"Timeframe", format_duration(static_cast<double>(t.timeframe_ms))});
      table_row(out, {"Colliding interactions", count(t.colliding_interactions)});
      table_row(out, {"Timestamp collisions (%)", format_value(t.collision_rate_pct)});
      out << '\n';
    }
    distribution_header(out);
    if (details.core) {
      distribution_rows(out, "Item popularity", details.core->popularity, false);
      distribution_rows(out, "Sequence length", details.core->seq_len, false);
    }
    if (details.temporal) {
      distribution_rows(out, "Time delta", details.temporal->delta_t, true);
      distribution_rows(out, "User lifetime", details.temporal->user_lifetime, true);
      distribution_rows(out, "Item lifetime", details.temporal->item_lifetime, true);
    }
  }

  if (details.repeats) {
    const auto& r = *details.repeats;
    anchor(out, "repeats", "Repeat consumption");
    table_header(out, {"Statistic", "Count", "Share (%)"});
    table_row(out, {"Repeated interactions", count(r.repeated_count), format_value(r.repeated_interactions_pct)});
    table_row(out, {"Consecutive repeats", count(r.consecutive_count), format_value(r.consecutive_repeats_pct)});
    out << '\n';
    distribution_header(out);
    distribution_rows(out, "Per-user repeat share (%)", r.per_user_repeat_share, false);
  }

  if (details.core_vs_reference) {
    anchor(out, "reference", "Comparison with reference subset");
    table_header(out, {"Field", "Analysed", "Reference", "Change (%)"});
    for (const auto& row : details.core_vs_reference->rows) {
      table_row(out, {row.field, format_value(row.analysed), format_value(row.reference), cell(row.delta_pct)});
    }
  }

  if (details.split) {
    anchor(out, "split", "Split subsets");
    table_header(out, {"Subset", "Users", "Items", "Interactions", "Start", "End"});
    for (const auto& r : details.split->roles) {
      table_row(out, {std::string(role_name(r.role)), count(r.n_users), count(r.n_items), count(r.n_interactions),
                      ts_cell(r.start_ts), ts_cell(r.end_ts)});
    }
    out << "\nEvaluation users without input: validation " << details.split->val_users_without_input
        << ", test " << details.split->test_users_without_input << ".\n";
  }

  if (!details.leakage.empty()) {
    anchor(out, "leakage", "Temporal leakage");
    table_header(out, {"Side", "Targets", "Shared", "Overlap (%)", "Leaked (%)", "Item-leaked (%)"});
    for (const auto& l : details.leakage) {
      table_row(out, {std::string(eval_side_name(l.eval_side)), count(l.n_targets), count(l.shared_interactions),
                      format_value(l.overlap_pct), format_value(l.leaked_target_pct),
                      format_value(l.leaked_item_target_pct)});
    }
    for (const auto& l : details.leakage) {
      share_series(out, std::string("Leaked targets, ") + std::string(eval_side_name(l.eval_side)),
                   l.leaked_over_time, l.granularity);
    }
  }

  if (!details.cold_start.empty()) {
    anchor(out, "cold_start", "Cold start");
    table_header(out, {"Side", "Eval users", "Cold users (%)", "Target items", "Cold items (%)",
                       "Cold targets (%)"});
    for (const auto& c : details.cold_start) {
      table_row(out, {std::string(eval_side_name(c.eval_side)), count(c.n_eval_users),
                      format_value(c.cold_users_pct), count(c.n_target_items), format_value(c.cold_items_pct),
                      format_value(c.cold_interactions_pct)});
    }
    for (const auto& c : details.cold_start) {
      share_series(out, std::string("Cold targets, ") + std::string(eval_side_name(c.eval_side)),
                   c.cold_over_time, c.granularity);
    }
  }

  if (!details.shift.empty()) {
    anchor(out, "shift", "Distribution shift");
    table_header(out, {"Side", "Targets", "Without input", "Time-gap KS", "Position KS"});
    for (const auto& s : details.shift) {
      table_row(out, {std::string(eval_side_name(s.eval_side)), count(s.n_targets), count(s.targets_without_input),
                      cell(s.timegap_ks), format_value(s.position_ks)});
    }
    out << '\n';
    distribution_header(out);
    for (const auto& s : details.shift) {
      const std::string side(eval_side_name(s.eval_side));
      distribution_rows(out, "Target gaps, " + side, s.target_gaps, true);
      distribution_rows(out, "Reference gaps, " + side, s.reference_gaps, true);
      distribution_rows(out, "Target positions, " + side, s.target_positions, false);
      distribution_rows(out, "Reference positions, " + side, s.reference_positions, false);
    }
  }

  if (details.comparison) {
    anchor(out, "compare", "Split comparison");
    out << render_comparison_markdown(*details.comparison);
  }
  return out.str();
}

std::string render_comparison_text(const SplitComparisonMatrix& matrix) {
  const auto rows = comparison_cells(matrix);
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        out << r[i] << std::string(width[i] - r[i].size(), ' ');
      } else {
        out << "  " << std::string(width[i] - r[i].size(), ' ') << r[i];
      }
    }
    out << '\n';
  }
  for (const auto& w : matrix.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string render_comparison_markdown(const SplitComparisonMatrix& matrix) {
  const auto rows = comparison_cells(matrix);
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << '|';
    for (const auto& c : rows[r]) out << ' ' << c << " |";
    out << '\n';
    if (r == 0) {
      out << '|';
      for (std::size_t i = 0; i < rows[r].size(); ++i) out << (i < 2 ? "---|" : "---:|");
      out << '\n';
    }
  }
  for (const auto& w : matrix.warnings) out << "\n> warning: " << w << '\n';
  return out.str();
}

}  // namespace splitaudit
