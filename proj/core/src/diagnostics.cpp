#include "splitaudit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "splitaudit/error.hpp"

namespace splitaudit {

namespace {

double pct(std::uint64_t part, std::uint64_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::optional<TimeRange> range_of(const InteractionLog& log) {
  if (log.empty()) return std::nullopt;
  TimeRange r{log.interactions().front().timestamp, log.interactions().front().timestamp};
  for (const auto& x : log.interactions()) {
    r.start = std::min(r.start, x.timestamp);
    r.end = std::max(r.end, x.timestamp);
  }
  return r;
}

struct TripleHash {
  std::size_t operator()(const Interaction& x) const {
    std::size_t h = std::hash<std::uint32_t>{}(index_of(x.user));
    h ^= std::hash<std::uint32_t>{}(index_of(x.item)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<Timestamp>{}(x.timestamp) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct TripleEq {
  bool operator()(const Interaction& a, const Interaction& b) const {
    return a.user == b.user && a.item == b.item && a.timestamp == b.timestamp;
  }
};

class ShareSeries {
 public:
  explicit ShareSeries(Granularity g) : granularity_(g) {}
  void add(Timestamp ts, bool flagged) {
    auto& b = buckets_[bucket_floor(ts, granularity_)];
    ++b.first;
    if (flagged) ++b.second;
  }
  std::vector<TimeShareBucket> finish() const {
    std::vector<TimeShareBucket> out;
    for (const auto& [start, c] : buckets_) out.push_back({start, c.first, c.second, pct(c.second, c.first)});
    return out;
  }

 private:
  Granularity granularity_;
  std::map<Timestamp, std::pair<std::uint64_t, std::uint64_t>> buckets_;
};

void require_shared_vocabulary(const InteractionLog& a, const InteractionLog& b) {
  if (!a.empty() && !b.empty() && a.shared_vocabulary() != b.shared_vocabulary()) {
    throw Error(ErrorCode::kInvalidArgument, "bundle subsets were loaded with different vocabularies");
  }
}

void normalized_positions(const InteractionLog& log, std::vector<double>& out) {
  for (const auto& slice : log.users()) {
    const double len = static_cast<double>(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i) out.push_back(static_cast<double>(i + 1) / len);
  }
}

}  // namespace

LeakageReport leakage(const SplitBundle& bundle, EvalSide side, Granularity granularity) {
  const InteractionLog& train = bundle.train;
  const InteractionLog& target = bundle.target(side);
  require_shared_vocabulary(train, target);
  LeakageReport r;
  r.eval_side = side;
  r.granularity = granularity;
  r.n_targets = target.size();
  r.empty_target = target.empty();
  r.train_range = range_of(train);
  r.eval_range = range_of(target);

  if (r.train_range && r.eval_range) {
    const auto& tr = *r.train_range;
    const auto& ev = *r.eval_range;
    const Timestamp lo = std::max(tr.start, ev.start);
    const Timestamp hi = std::min(tr.end, ev.end);
    if (ev.end == ev.start) {
      r.overlap_pct = (ev.start >= tr.start && ev.start <= tr.end) ? 100.0 : 0.0;
    } else if (hi > lo) {
      r.overlap_pct = 100.0 * static_cast<double>(hi - lo) / static_cast<double>(ev.end - ev.start);
    }
  }
  if (target.empty()) return r;

  std::unordered_set<Interaction, TripleHash, TripleEq> train_rows(train.interactions().begin(),
                                                                   train.interactions().end());
  const std::size_t n_items = target.vocabulary().item_count();
  std::vector<std::optional<Timestamp>> item_last_train(n_items);
  for (const auto& x : train.interactions()) {
    auto& slot = item_last_train[index_of(x.item)];
    if (!slot || *slot < x.timestamp) slot = x.timestamp;
  }
  const bool has_train = r.train_range.has_value();
  const Timestamp train_max = has_train ? r.train_range->end : 0;

  ShareSeries series(granularity);
  for (const auto& x : target.interactions()) {
    if (train_rows.count(x)) ++r.shared_interactions;
    const bool leaked = has_train && x.timestamp < train_max;
    const auto& item_max = item_last_train[index_of(x.item)];
    const bool item_leaked = item_max && x.timestamp < *item_max;
    r.leaked_targets += leaked;
    r.leaked_item_targets += item_leaked;
    series.add(x.timestamp, leaked);
  }
  r.leaked_target_pct = pct(r.leaked_targets, r.n_targets);
  r.leaked_item_target_pct = pct(r.leaked_item_targets, r.n_targets);
  r.leaked_over_time = series.finish();
  return r;
}

ColdStartReport cold_start(const SplitBundle& bundle, EvalSide side, Granularity granularity) {
  const InteractionLog& train = bundle.train;
  const InteractionLog& target = bundle.target(side);
  require_shared_vocabulary(train, target);
  ColdStartReport r;
  r.eval_side = side;
  r.granularity = granularity;
  r.n_targets = target.size();
  if (target.empty()) return r;

  const auto& vocab = target.vocabulary();
  std::vector<bool> warm_item(vocab.item_count(), false);
  for (const auto& x : train.interactions()) warm_item[index_of(x.item)] = true;

  r.n_eval_users = target.user_count();
  for (const auto& slice : target.users()) {
    if (!train.find_user(slice.user)) ++r.cold_users;
  }

  std::vector<bool> seen_item(vocab.item_count(), false);
  ShareSeries series(granularity);
  for (const auto& x : target.interactions()) {
    const bool cold = !warm_item[index_of(x.item)];
    if (!seen_item[index_of(x.item)]) {
      seen_item[index_of(x.item)] = true;
      ++r.n_target_items;
      r.cold_items += cold;
    }
    r.cold_interactions += cold;
    series.add(x.timestamp, cold);
  }
  r.cold_users_pct = pct(r.cold_users, r.n_eval_users);
  r.cold_items_pct = pct(r.cold_items, r.n_target_items);
  r.cold_interactions_pct = pct(r.cold_interactions, r.n_targets);
  r.cold_over_time = series.finish();
  return r;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptySample, "KS statistic needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

ShiftSamples shift_samples(const SplitBundle& bundle, const InteractionLog& reference, EvalSide side) {
  const InteractionLog& input = bundle.input(side);
  const InteractionLog& target = bundle.target(side);
  require_shared_vocabulary(input, target);
  ShiftSamples s;
  for (const auto& slice : target.users()) {
    const auto targets = target.sequence(slice);
    const auto in_slice = input.find_user(slice.user);
    std::span<const Interaction> history;
    if (in_slice) history = input.sequence(*in_slice);

    if (history.empty()) {
      s.targets_without_input += targets.size();
    } else {
      for (const auto& t : targets) {
        s.target_gaps.push_back(static_cast<double>(t.timestamp - history.back().timestamp));
      }
    }

    // Both parts are canonical; merge to find each target's rank.
    const double len = static_cast<double>(history.size() + targets.size());
    std::size_t h = 0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      while (h < history.size() && canonical_less(history[h], targets[k])) ++h;
      s.target_positions.push_back(static_cast<double>(h + k + 1) / len);
    }
  }
  for (const auto& slice : reference.users()) {
    const auto seq = reference.sequence(slice);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      s.reference_gaps.push_back(static_cast<double>(seq[i].timestamp - seq[i - 1].timestamp));
    }
  }
  normalized_positions(reference, s.reference_positions);
  return s;
}

ShiftReport distribution_shift(const SplitBundle& bundle, const InteractionLog& reference,
                               EvalSide side) {
  if (bundle.target(side).empty()) {
    throw Error(ErrorCode::kEmptyTargets,
                std::string(eval_side_name(side)) + " target subset is empty");
  }
  if (reference.empty()) throw Error(ErrorCode::kEmptyReference, "reference log is empty");

  ShiftSamples s = shift_samples(bundle, reference, side);
  ShiftReport r;
  r.eval_side = side;
  r.n_targets = bundle.target(side).size();
  r.targets_without_input = s.targets_without_input;
  if (!s.target_gaps.empty() && !s.reference_gaps.empty()) {
    r.timegap_ks = ks_statistic(s.target_gaps, s.reference_gaps);
  }
  r.position_ks = ks_statistic(s.target_positions, s.reference_positions);
  r.target_gaps = summarize(std::move(s.target_gaps));
  r.reference_gaps = summarize(std::move(s.reference_gaps));
  r.target_positions = summarize(std::move(s.target_positions));
  r.reference_positions = summarize(std::move(s.reference_positions));
  return r;
}

SplitComparisonMatrix compare_splits(std::span<const NamedBundle> bundles,
                                     const InteractionLog* reference, const CompareOptions& options) {
  if (bundles.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "comparison needs at least two bundles");
  }
  SplitComparisonMatrix m;
  const Provenance& first = bundles.front().bundle->provenance;
  for (const auto& nb : bundles.subspan(1)) {
    const Provenance& p = nb.bundle->provenance;
    if (p.source_id != first.source_id || p.preprocessing != first.preprocessing) {
      std::string msg = "bundle '" + nb.name + "' was built from a different source or preprocessing than '" +
                        bundles.front().name + "'";
      if (!options.allow_provenance_mismatch) throw Error(ErrorCode::kProvenanceMismatch, msg);
      m.warnings.push_back(std::move(msg));
    }
  }
  for (const auto& nb : bundles) {
    SplitComparisonRow row;
    row.name = nb.name;
    row.spec = nb.bundle->spec;
    row.description = describe_split(*nb.bundle);
    row.leakage = leakage(*nb.bundle, EvalSide::kTest);
    row.cold_start = cold_start(*nb.bundle, EvalSide::kTest);
    if (reference && !reference->empty() && !nb.bundle->test_target.empty()) {
      row.shift = distribution_shift(*nb.bundle, *reference, EvalSide::kTest);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace splitaudit
