#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitaudit/split.hpp"
#include "splitaudit/stats.hpp"

namespace splitaudit {

struct TimeShareBucket {
  Timestamp start = 0;
  std::uint64_t targets = 0;
  std::uint64_t flagged = 0;
  double share_pct = 0;

  bool operator==(const TimeShareBucket&) const = default;
};

// Target-side leakage against the training subset. Shared interactions and the
// evaluation time range are taken over the target subset.
struct LeakageReport {
  EvalSide eval_side = EvalSide::kTest;
  bool empty_target = false;
  std::uint64_t n_targets = 0;
  // Target rows whose (user, item, timestamp) also occurs in train.
  std::uint64_t shared_interactions = 0;
  std::optional<TimeRange> train_range;
  std::optional<TimeRange> eval_range;
  double overlap_pct = 0;
  // Targets strictly earlier than the latest training timestamp.
  std::uint64_t leaked_targets = 0;
  double leaked_target_pct = 0;
  // Targets strictly earlier than some training interaction with the same item.
  std::uint64_t leaked_item_targets = 0;
  double leaked_item_target_pct = 0;
  Granularity granularity = Granularity::kDay;
  std::vector<TimeShareBucket> leaked_over_time;

  bool operator==(const LeakageReport&) const = default;
};

struct ColdStartReport {
  EvalSide eval_side = EvalSide::kTest;
  std::uint64_t n_eval_users = 0;
  std::uint64_t cold_users = 0;
  double cold_users_pct = 0;
  std::uint64_t n_target_items = 0;
  std::uint64_t cold_items = 0;
  double cold_items_pct = 0;
  std::uint64_t n_targets = 0;
  std::uint64_t cold_interactions = 0;
  double cold_interactions_pct = 0;
  Granularity granularity = Granularity::kDay;
  std::vector<TimeShareBucket> cold_over_time;

  bool operator==(const ColdStartReport&) const = default;
};

struct ShiftReport {
  EvalSide eval_side = EvalSide::kTest;
  // Absent when either gap sample is empty.
  std::optional<double> timegap_ks;
  double position_ks = 0;
  std::uint64_t n_targets = 0;
  std::uint64_t targets_without_input = 0;
  DistributionSummary target_gaps;
  DistributionSummary reference_gaps;
  DistributionSummary target_positions;
  DistributionSummary reference_positions;

  bool operator==(const ShiftReport&) const = default;
};

LeakageReport leakage(const SplitBundle& bundle, EvalSide side,
                      Granularity granularity = Granularity::kDay);

ColdStartReport cold_start(const SplitBundle& bundle, EvalSide side,
                           Granularity granularity = Granularity::kDay);

// Exact two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

struct ShiftSamples {
  std::vector<double> target_gaps;
  std::vector<double> reference_gaps;
  std::vector<double> target_positions;
  std::vector<double> reference_positions;
  std::uint64_t targets_without_input = 0;
};

// Gap: target timestamp minus the user's last input timestamp. Position: 1-based
// index in the user's input+target sequence divided by its length. Reference
// gaps are all consecutive within-user gaps, reference positions every
// interaction's normalized position.
ShiftSamples shift_samples(const SplitBundle& bundle, const InteractionLog& reference, EvalSide side);

ShiftReport distribution_shift(const SplitBundle& bundle, const InteractionLog& reference,
                               EvalSide side);

struct NamedBundle {
  std::string name;
  const SplitBundle* bundle = nullptr;
};

struct SplitComparisonRow {
  std::string name;
  SplitSpec spec;
  SplitDescription description;
  LeakageReport leakage;      // test side
  ColdStartReport cold_start;  // test side
  std::optional<ShiftReport> shift;

  bool operator==(const SplitComparisonRow&) const = default;
};

struct SplitComparisonMatrix {
  std::vector<SplitComparisonRow> rows;
  std::vector<std::string> warnings;

  bool operator==(const SplitComparisonMatrix&) const = default;
};

struct CompareOptions {
  // Report provenance mismatches as warnings instead of failing.
  bool allow_provenance_mismatch = false;
};

// Needs at least two bundles. Shift columns are filled when a reference is given.
SplitComparisonMatrix compare_splits(std::span<const NamedBundle> bundles,
                                     const InteractionLog* reference = nullptr,
                                     const CompareOptions& options = {});

}  // namespace splitaudit
