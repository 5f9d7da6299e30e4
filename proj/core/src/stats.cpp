#include "splitaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "splitaudit/error.hpp"

namespace splitaudit {

namespace {

void require_non_empty(const InteractionLog& log, const char* what) {
  if (log.empty()) throw Error(ErrorCode::kEmptyLog, std::string(what) + " of an empty log");
}

std::vector<HistogramBin> equal_width_bins(std::span<const double> sorted, std::size_t bins) {
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].lower = lo + width * static_cast<double>(i);
    out[i].upper = i + 1 == bins ? hi : lo + width * static_cast<double>(i + 1);
  }
  for (double v : sorted) {
    auto idx = static_cast<std::size_t>(std::floor((v - lo) / width));
    idx = std::min(idx, bins - 1);
    // Floating-point edges: keep the value inside [lower, upper].
    while (idx > 0 && v < out[idx].lower) --idx;
    while (idx + 1 < bins && v >= out[idx + 1].lower) ++idx;
    ++out[idx].count;
  }
  return out;
}

std::size_t bin_count(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  const double range = sorted.back() - sorted.front();
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  std::size_t bins;
  if (iqr > 0) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    bins = static_cast<std::size_t>(std::ceil(range / width));
  } else {
    bins = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
  }
  return std::clamp<std::size_t>(bins, 1, 100);
}

// Per-user (or per-item) first/last timestamps.
struct Span {
  Timestamp first = 0;
  Timestamp last = 0;
  bool seen = false;
  void add(Timestamp t) {
    if (!seen) {
      first = last = t;
      seen = true;
    } else {
      first = std::min(first, t);
      last = std::max(last, t);
    }
  }
};

void push_summary(std::vector<std::pair<std::string, double>>& out, const std::string& name,
                  const DistributionSummary& d) {
  out.emplace_back(name + ".mean", d.mean);
  out.emplace_back(name + ".median", d.median());
  out.emplace_back(name + ".min", d.min);
  out.emplace_back(name + ".max", d.max);
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return 0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::vector<HistogramBin> linear_histogram(std::span<const double> sorted) {
  if (sorted.empty()) return {};
  if (sorted.front() == sorted.back()) {
    return {{sorted.front(), sorted.back(), static_cast<std::uint64_t>(sorted.size())}};
  }
  return equal_width_bins(sorted, bin_count(sorted));
}

std::vector<HistogramBin> log_histogram(std::span<const double> sorted) {
  if (sorted.empty() || sorted.front() < 0) return {};
  std::vector<double> transformed(sorted.size());
  std::transform(sorted.begin(), sorted.end(), transformed.begin(),
                 [](double v) { return std::log10(1.0 + v); });
  auto bins = linear_histogram(transformed);
  for (auto& b : bins) {
    b.lower = std::pow(10.0, b.lower) - 1.0;
    b.upper = std::pow(10.0, b.upper) - 1.0;
  }
  bins.front().lower = sorted.front();
  bins.back().upper = sorted.back();
  return bins;
}

DistributionSummary summarize(std::vector<double> values, bool with_log_bins) {
  DistributionSummary d;
  d.count = values.size();
  if (values.empty()) return d;
  double sum = 0;
  for (double v : values) sum += v;
  d.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  d.min = values.front();
  d.max = values.back();
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    d.quantiles[i] = quantile_sorted(values, kQuantileLevels[i]);
  }
  d.histogram = linear_histogram(values);
  if (with_log_bins) d.log_histogram = log_histogram(values);
  return d;
}

CoreStatsReport core_stats(const InteractionLog& log) {
  require_non_empty(log, "core statistics");
  CoreStatsReport r;
  r.n_users = log.user_count();
  r.n_interactions = log.size();

  std::vector<std::uint64_t> per_item(log.vocabulary().item_count(), 0);
  for (const auto& x : log.interactions()) ++per_item[index_of(x.item)];
  std::vector<double> popularity;
  for (auto c : per_item) {
    if (c > 0) popularity.push_back(static_cast<double>(c));
  }
  r.n_items = popularity.size();

  std::vector<double> lengths;
  lengths.reserve(r.n_users);
  for (const auto& slice : log.users()) lengths.push_back(static_cast<double>(slice.size()));

  r.avg_seq_len = static_cast<double>(r.n_interactions) / static_cast<double>(r.n_users);
  r.density_pct = 100.0 * static_cast<double>(r.n_interactions) /
                  (static_cast<double>(r.n_users) * static_cast<double>(r.n_items));
  r.popularity = summarize(std::move(popularity));
  r.seq_len = summarize(std::move(lengths));
  return r;
}

TemporalStatsReport temporal_stats(const InteractionLog& log) {
  require_non_empty(log, "temporal statistics");
  TemporalStatsReport r;
  const auto xs = log.interactions();

  r.start_ts = xs.front().timestamp;
  r.end_ts = xs.front().timestamp;
  std::vector<Span> items(log.vocabulary().item_count());
  for (const auto& x : xs) {
    r.start_ts = std::min(r.start_ts, x.timestamp);
    r.end_ts = std::max(r.end_ts, x.timestamp);
    items[index_of(x.item)].add(x.timestamp);
  }
  r.timeframe_ms = r.end_ts - r.start_ts;

  std::vector<double> deltas, user_lifetimes;
  deltas.reserve(xs.size());
  user_lifetimes.reserve(log.user_count());
  for (const auto& slice : log.users()) {
    const auto seq = log.sequence(slice);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      deltas.push_back(static_cast<double>(seq[i].timestamp - seq[i - 1].timestamp));
    }
    user_lifetimes.push_back(static_cast<double>(seq.back().timestamp - seq.front().timestamp));
    for (std::size_t i = 0; i < seq.size();) {
      std::size_t j = i + 1;
      while (j < seq.size() && seq[j].timestamp == seq[i].timestamp) ++j;
      if (j - i >= 2) r.colliding_interactions += j - i;
      i = j;
    }
  }
  std::vector<double> item_lifetimes;
  for (const auto& s : items) {
    if (s.seen) item_lifetimes.push_back(static_cast<double>(s.last - s.first));
  }

  r.collision_rate_pct =
      100.0 * static_cast<double>(r.colliding_interactions) / static_cast<double>(xs.size());
  r.delta_t = summarize(std::move(deltas), true);
  r.user_lifetime = summarize(std::move(user_lifetimes), true);
  r.item_lifetime = summarize(std::move(item_lifetimes), true);
  return r;
}

RepeatReport repeat_stats(const InteractionLog& log) {
  require_non_empty(log, "repeat statistics");
  RepeatReport r;
  r.n_interactions = log.size();
  std::vector<std::uint32_t> last_seen_in(log.vocabulary().item_count(), UINT32_MAX);
  std::vector<double> shares;
  shares.reserve(log.user_count());
  std::uint32_t user_no = 0;
  for (const auto& slice : log.users()) {
    const auto seq = log.sequence(slice);
    std::uint64_t repeated = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto& mark = last_seen_in[index_of(seq[i].item)];
      if (mark == user_no) {
        ++repeated;
      } else {
        mark = user_no;
      }
      if (i > 0 && seq[i].item == seq[i - 1].item) ++r.consecutive_count;
    }
    r.repeated_count += repeated;
    shares.push_back(100.0 * static_cast<double>(repeated) / static_cast<double>(seq.size()));
    ++user_no;
  }
  const double n = static_cast<double>(r.n_interactions);
  r.repeated_interactions_pct = 100.0 * static_cast<double>(r.repeated_count) / n;
  r.consecutive_repeats_pct = 100.0 * static_cast<double>(r.consecutive_count) / n;
  r.per_user_repeat_share = summarize(std::move(shares));
  return r;
}

TimelineReport timeline(std::span<const NamedLog> logs, Granularity granularity,
                        std::optional<TimeRange> range) {
  if (range && range->start > range->end) {
    throw Error(ErrorCode::kInvalidRange, "timeline range start is after its end");
  }
  TimelineReport r;
  r.granularity = granularity;
  if (range) {
    r.range = *range;
  } else {
    bool any = false;
    for (const auto& named : logs) {
      for (const auto& x : named.log->interactions()) {
        if (!any) {
          r.range = {x.timestamp, x.timestamp};
          any = true;
        }
        r.range.start = std::min(r.range.start, x.timestamp);
        r.range.end = std::max(r.range.end, x.timestamp);
      }
    }
  }
  for (const auto& named : logs) {
    RoleTimeline role{named.role, {}, 0, 0};
    std::map<Timestamp, std::uint64_t> counts;
    for (const auto& x : named.log->interactions()) {
      if (x.timestamp < r.range.start || x.timestamp > r.range.end) {
        ++role.excluded;
        continue;
      }
      ++role.in_range;
      ++counts[bucket_floor(x.timestamp, granularity)];
    }
    for (const auto& [start, count] : counts) role.buckets.push_back({start, count});
    r.roles.push_back(std::move(role));
  }
  return r;
}

std::string_view stats_report_kind(const StatsReport& report) {
  switch (report.index()) {
    case 0: return "core_stats";
    case 1: return "temporal_stats";
    default: return "repeat_stats";
  }
}

std::vector<std::pair<std::string, double>> numeric_fields(const StatsReport& report) {
  std::vector<std::pair<std::string, double>> out;
  if (const auto* c = std::get_if<CoreStatsReport>(&report)) {
    out.emplace_back("n_users", static_cast<double>(c->n_users));
    out.emplace_back("n_items", static_cast<double>(c->n_items));
    out.emplace_back("n_interactions", static_cast<double>(c->n_interactions));
    out.emplace_back("avg_seq_len", c->avg_seq_len);
    out.emplace_back("density_pct", c->density_pct);
    push_summary(out, "popularity", c->popularity);
    push_summary(out, "seq_len", c->seq_len);
  } else if (const auto* t = std::get_if<TemporalStatsReport>(&report)) {
    out.emplace_back("start_ts", static_cast<double>(t->start_ts));
    out.emplace_back("end_ts", static_cast<double>(t->end_ts));
    out.emplace_back("timeframe_ms", static_cast<double>(t->timeframe_ms));
    push_summary(out, "delta_t", t->delta_t);
    out.emplace_back("colliding_interactions", static_cast<double>(t->colliding_interactions));
    out.emplace_back("collision_rate_pct", t->collision_rate_pct);
    push_summary(out, "user_lifetime", t->user_lifetime);
    push_summary(out, "item_lifetime", t->item_lifetime);
  } else {
    const auto& rep = std::get<RepeatReport>(report);
    out.emplace_back("n_interactions", static_cast<double>(rep.n_interactions));
    out.emplace_back("repeated_count", static_cast<double>(rep.repeated_count));
    out.emplace_back("consecutive_count", static_cast<double>(rep.consecutive_count));
    out.emplace_back("repeated_interactions_pct", rep.repeated_interactions_pct);
    out.emplace_back("consecutive_repeats_pct", rep.consecutive_repeats_pct);
    push_summary(out, "per_user_repeat_share", rep.per_user_repeat_share);
  }
  return out;
}

ComparisonTable compare_stats(const StatsReport& analysed, const StatsReport& reference) {
  if (analysed.index() != reference.index()) {
    throw Error(ErrorCode::kTypeMismatch, "cannot compare " + std::string(stats_report_kind(analysed)) +
                                              " with " + std::string(stats_report_kind(reference)));
  }
  ComparisonTable table;
  table.report_kind = stats_report_kind(analysed);
  const auto a = numeric_fields(analysed);
  const auto b = numeric_fields(reference);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ComparisonRow row{a[i].first, a[i].second, b[i].second, std::nullopt};
    if (b[i].second != 0) row.delta_pct = 100.0 * (a[i].second - b[i].second) / b[i].second;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace splitaudit
