#include <algorithm>
#include <array>

#include "json_codec.hpp"
#include "splitaudit/error.hpp"
#include "splitaudit/version.hpp"

namespace splitaudit {

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
void get_opt(const Json& j, const char* key, std::optional<T>& out) {
  const Json& x = j.at(key);
  if (x.is_null()) {
    out.reset();
  } else {
    out = x.get<T>();
  }
}

template <typename T>
void get(const Json& j, const char* key, T& out) {
  out = j.at(key).get<T>();
}

const std::string& get_string(const Json& j, const char* key) {
  const Json& x = j.at(key);
  if (!x.is_string()) throw DecodeError(std::string("field '") + key + "' must be a string");
  return x.get_ref<const std::string&>();
}

void require_object(const Json& j) {
  if (!j.is_object()) throw DecodeError("expected an object");
}

SubsetRole role_of(const std::string& s) {
  auto r = role_from_name(s);
  if (!r) throw DecodeError("unknown subset role '" + s + "'");
  return *r;
}

EvalSide side_of(const std::string& s) {
  auto r = eval_side_from_name(s);
  if (!r) throw DecodeError("unknown evaluation side '" + s + "'");
  return *r;
}

Granularity granularity_of(const std::string& s) {
  auto r = granularity_from_name(s);
  if (!r) throw DecodeError("unknown granularity '" + s + "'");
  return *r;
}

constexpr std::array<std::string_view, 16> kKinds = {
    "core_stats",   "temporal_stats", "repeat_stats",     "timeline", "comparison_table", "split_description",
    "leakage",      "cold_start",     "shift",            "split_comparison", "summary", "audit_details",
    "thresholds",   "split_spec",     "preprocess_spec",  "provenance"};

template <std::size_t I = 0>
Document decode_kind(std::size_t index, const Json& payload) {
  if constexpr (I < std::variant_size_v<Document>) {
    if (index == I) {
      std::variant_alternative_t<I, Document> value{};
      require_object(payload);
      from_json(payload, value);
      return Document(std::in_place_index<I>, std::move(value));
    }
    return decode_kind<I + 1>(index, payload);
  } else {
    throw DecodeError("unknown document kind");
  }
}

// Rejects pathological nesting before handing text to the parser.
void check_depth(std::string_view s) {
  constexpr int kMaxDepth = 128;
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth > kMaxDepth) throw Error(ErrorCode::kMalformedDocument, "document nested too deeply");
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
}

}  // namespace

void to_json(Json& j, const HistogramBin& v) {
  j = Json{{"lower", v.lower}, {"upper", v.upper}, {"count", v.count}};
}
void from_json(const Json& j, HistogramBin& v) {
  get(j, "lower", v.lower);
  get(j, "upper", v.upper);
  get(j, "count", v.count);
}

void to_json(Json& j, const DistributionSummary& v) {
  Json q = Json::object();
  static constexpr const char* kNames[] = {"q05", "q25", "q50", "q75", "q95"};
  for (std::size_t i = 0; i < v.quantiles.size(); ++i) q[kNames[i]] = v.quantiles[i];
  j = Json{{"count", v.count},         {"mean", v.mean},           {"min", v.min},
           {"max", v.max},             {"quantiles", q},           {"histogram", v.histogram},
           {"log_histogram", v.log_histogram}};
}
void from_json(const Json& j, DistributionSummary& v) {
  get(j, "count", v.count);
  get(j, "mean", v.mean);
  get(j, "min", v.min);
  get(j, "max", v.max);
  static constexpr const char* kNames[] = {"q05", "q25", "q50", "q75", "q95"};
  const Json& q = j.at("quantiles");
  for (std::size_t i = 0; i < v.quantiles.size(); ++i) get(q, kNames[i], v.quantiles[i]);
  get(j, "histogram", v.histogram);
  get(j, "log_histogram", v.log_histogram);
}

void to_json(Json& j, const CoreStatsReport& v) {
  j = Json{{"n_users", v.n_users},
           {"n_items", v.n_items},
           {"n_interactions", v.n_interactions},
           {"avg_seq_len", v.avg_seq_len},
           {"density_pct", v.density_pct},
           {"popularity", v.popularity},
           {"seq_len", v.seq_len}};
}
void from_json(const Json& j, CoreStatsReport& v) {
  get(j, "n_users", v.n_users);
  get(j, "n_items", v.n_items);
  get(j, "n_interactions", v.n_interactions);
  get(j, "avg_seq_len", v.avg_seq_len);
  get(j, "density_pct", v.density_pct);
  get(j, "popularity", v.popularity);
  get(j, "seq_len", v.seq_len);
}

void to_json(Json& j, const TemporalStatsReport& v) {
  j = Json{{"start_ts", v.start_ts},
           {"end_ts", v.end_ts},
           {"timeframe_ms", v.timeframe_ms},
           {"delta_t_ms", v.delta_t},
           {"colliding_interactions", v.colliding_interactions},
           {"collision_rate_pct", v.collision_rate_pct},
           {"collision_definition", v.collision_definition},
           {"user_lifetime_ms", v.user_lifetime},
           {"item_lifetime_ms", v.item_lifetime}};
}
void from_json(const Json& j, TemporalStatsReport& v) {
  get(j, "start_ts", v.start_ts);
  get(j, "end_ts", v.end_ts);
  get(j, "timeframe_ms", v.timeframe_ms);
  get(j, "delta_t_ms", v.delta_t);
  get(j, "colliding_interactions", v.colliding_interactions);
  get(j, "collision_rate_pct", v.collision_rate_pct);
  v.collision_definition = get_string(j, "collision_definition");
  get(j, "user_lifetime_ms", v.user_lifetime);
  get(j, "item_lifetime_ms", v.item_lifetime);
}

void to_json(Json& j, const RepeatReport& v) {
  j = Json{{"n_interactions", v.n_interactions},
           {"repeated_count", v.repeated_count},
           {"consecutive_count", v.consecutive_count},
           {"repeated_interactions_pct", v.repeated_interactions_pct},
           {"consecutive_repeats_pct", v.consecutive_repeats_pct},
           {"per_user_repeat_share_pct", v.per_user_repeat_share}};
}
void from_json(const Json& j, RepeatReport& v) {
  get(j, "n_interactions", v.n_interactions);
  get(j, "repeated_count", v.repeated_count);
  get(j, "consecutive_count", v.consecutive_count);
  get(j, "repeated_interactions_pct", v.repeated_interactions_pct);
  get(j, "consecutive_repeats_pct", v.consecutive_repeats_pct);
  get(j, "per_user_repeat_share_pct", v.per_user_repeat_share);
}

void to_json(Json& j, const TimeRange& v) { j = Json{{"start", v.start}, {"end", v.end}}; }
void from_json(const Json& j, TimeRange& v) {
  get(j, "start", v.start);
  get(j, "end", v.end);
}

void to_json(Json& j, const TimelineReport& v) {
  Json roles = Json::array();
  for (const auto& r : v.roles) {
    Json buckets = Json::array();
    for (const auto& b : r.buckets) buckets.push_back(Json{{"start", b.start}, {"count", b.count}});
    roles.push_back(Json{{"role", r.role}, {"in_range", r.in_range}, {"excluded", r.excluded}, {"buckets", buckets}});
  }
  j = Json{{"granularity", granularity_name(v.granularity)}, {"range", v.range}, {"roles", roles}};
}
void from_json(const Json& j, TimelineReport& v) {
  v.granularity = granularity_of(get_string(j, "granularity"));
  get(j, "range", v.range);
  v.roles.clear();
  for (const auto& r : j.at("roles")) {
    RoleTimeline t;
    t.role = get_string(r, "role");
    get(r, "in_range", t.in_range);
    get(r, "excluded", t.excluded);
    for (const auto& b : r.at("buckets")) {
      TimelineBucket bucket;
      get(b, "start", bucket.start);
      get(b, "count", bucket.count);
      t.buckets.push_back(bucket);
    }
    v.roles.push_back(std::move(t));
  }
}

void to_json(Json& j, const ComparisonTable& v) {
  Json rows = Json::array();
  for (const auto& r : v.rows) {
    rows.push_back(Json{{"field", r.field}, {"analysed", r.analysed}, {"reference", r.reference},
                        {"delta_pct", opt(r.delta_pct)}});
  }
  j = Json{{"report_kind", v.report_kind}, {"rows", rows}};
}
void from_json(const Json& j, ComparisonTable& v) {
  v.report_kind = get_string(j, "report_kind");
  v.rows.clear();
  for (const auto& r : j.at("rows")) {
    ComparisonRow row;
    row.field = get_string(r, "field");
    get(r, "analysed", row.analysed);
    get(r, "reference", row.reference);
    get_opt(r, "delta_pct", row.delta_pct);
    v.rows.push_back(std::move(row));
  }
}

void to_json(Json& j, const RoleDescription& v) {
  j = Json{{"role", role_name(v.role)},       {"n_users", v.n_users},
           {"n_items", v.n_items},            {"n_interactions", v.n_interactions},
           {"start_ts", opt(v.start_ts)},     {"end_ts", opt(v.end_ts)}};
}
void from_json(const Json& j, RoleDescription& v) {
  v.role = role_of(get_string(j, "role"));
  get(j, "n_users", v.n_users);
  get(j, "n_items", v.n_items);
  get(j, "n_interactions", v.n_interactions);
  get_opt(j, "start_ts", v.start_ts);
  get_opt(j, "end_ts", v.end_ts);
}

void to_json(Json& j, const SplitDescription& v) {
  j = Json{{"roles", v.roles},
           {"val_users_without_input", v.val_users_without_input},
           {"test_users_without_input", v.test_users_without_input}};
}
void from_json(const Json& j, SplitDescription& v) {
  get(j, "roles", v.roles);
  if (v.roles.size() != 5) throw DecodeError("split description needs five roles");
  get(j, "val_users_without_input", v.val_users_without_input);
  get(j, "test_users_without_input", v.test_users_without_input);
}

void to_json(Json& j, const TimeShareBucket& v) {
  j = Json{{"start", v.start}, {"targets", v.targets}, {"flagged", v.flagged}, {"share_pct", v.share_pct}};
}
void from_json(const Json& j, TimeShareBucket& v) {
  get(j, "start", v.start);
  get(j, "targets", v.targets);
  get(j, "flagged", v.flagged);
  get(j, "share_pct", v.share_pct);
}

void to_json(Json& j, const LeakageReport& v) {
  j = Json{{"eval_side", eval_side_name(v.eval_side)},
           {"empty_target", v.empty_target},
           {"n_targets", v.n_targets},
           {"shared_interactions", v.shared_interactions},
           {"train_range", opt(v.train_range)},
           {"eval_range", opt(v.eval_range)},
           {"overlap_pct", v.overlap_pct},
           {"leaked_targets", v.leaked_targets},
           {"leaked_target_pct", v.leaked_target_pct},
           {"leaked_item_targets", v.leaked_item_targets},
           {"leaked_item_target_pct", v.leaked_item_target_pct},
           {"granularity", granularity_name(v.granularity)},
           {"leaked_over_time", v.leaked_over_time}};
}
void from_json(const Json& j, LeakageReport& v) {
  v.eval_side = side_of(get_string(j, "eval_side"));
  get(j, "empty_target", v.empty_target);
  get(j, "n_targets", v.n_targets);
  get(j, "shared_interactions", v.shared_interactions);
  get_opt(j, "train_range", v.train_range);
  get_opt(j, "eval_range", v.eval_range);
  get(j, "overlap_pct", v.overlap_pct);
  get(j, "leaked_targets", v.leaked_targets);
  get(j, "leaked_target_pct", v.leaked_target_pct);
  get(j, "leaked_item_targets", v.leaked_item_targets);
  get(j, "leaked_item_target_pct", v.leaked_item_target_pct);
  v.granularity = granularity_of(get_string(j, "granularity"));
  get(j, "leaked_over_time", v.leaked_over_time);
}

void to_json(Json& j, const ColdStartReport& v) {
  j = Json{{"eval_side", eval_side_name(v.eval_side)},
           {"n_eval_users", v.n_eval_users},
           {"cold_users", v.cold_users},
           {"cold_users_pct", v.cold_users_pct},
           {"n_target_items", v.n_target_items},
           {"cold_items", v.cold_items},
           {"cold_items_pct", v.cold_items_pct},
           {"n_targets", v.n_targets},
           {"cold_interactions", v.cold_interactions},
           {"cold_interactions_pct", v.cold_interactions_pct},
           {"granularity", granularity_name(v.granularity)},
           {"cold_over_time", v.cold_over_time}};
}
void from_json(const Json& j, ColdStartReport& v) {
  v.eval_side = side_of(get_string(j, "eval_side"));
  get(j, "n_eval_users", v.n_eval_users);
  get(j, "cold_users", v.cold_users);
  get(j, "cold_users_pct", v.cold_users_pct);
  get(j, "n_target_items", v.n_target_items);
  get(j, "cold_items", v.cold_items);
  get(j, "cold_items_pct", v.cold_items_pct);
  get(j, "n_targets", v.n_targets);
  get(j, "cold_interactions", v.cold_interactions);
  get(j, "cold_interactions_pct", v.cold_interactions_pct);
  v.granularity = granularity_of(get_string(j, "granularity"));
  get(j, "cold_over_time", v.cold_over_time);
}

void to_json(Json& j, const ShiftReport& v) {
  j = Json{{"eval_side", eval_side_name(v.eval_side)},
           {"timegap_ks", opt(v.timegap_ks)},
           {"position_ks", v.position_ks},
           {"n_targets", v.n_targets},
           {"targets_without_input", v.targets_without_input},
           {"target_gaps_ms", v.target_gaps},
           {"reference_gaps_ms", v.reference_gaps},
           {"target_positions", v.target_positions},
           {"reference_positions", v.reference_positions}};
}
void from_json(const Json& j, ShiftReport& v) {
  v.eval_side = side_of(get_string(j, "eval_side"));
  get_opt(j, "timegap_ks", v.timegap_ks);
  get(j, "position_ks", v.position_ks);
  get(j, "n_targets", v.n_targets);
  get(j, "targets_without_input", v.targets_without_input);
  get(j, "target_gaps_ms", v.target_gaps);
  get(j, "reference_gaps_ms", v.reference_gaps);
  get(j, "target_positions", v.target_positions);
  get(j, "reference_positions", v.reference_positions);
}

void to_json(Json& j, const SplitComparisonRow& v) {
  j = Json{{"name", v.name},         {"spec", v.spec},           {"description", v.description},
           {"leakage", v.leakage},   {"cold_start", v.cold_start}, {"shift", opt(v.shift)}};
}
void from_json(const Json& j, SplitComparisonRow& v) {
  v.name = get_string(j, "name");
  get(j, "spec", v.spec);
  get(j, "description", v.description);
  get(j, "leakage", v.leakage);
  get(j, "cold_start", v.cold_start);
  get_opt(j, "shift", v.shift);
}

void to_json(Json& j, const SplitComparisonMatrix& v) { j = Json{{"rows", v.rows}, {"warnings", v.warnings}}; }
void from_json(const Json& j, SplitComparisonMatrix& v) {
  get(j, "rows", v.rows);
  get(j, "warnings", v.warnings);
}

void to_json(Json& j, const Card& v) {
  j = Json{{"metric", v.metric}, {"value", opt(v.value)}, {"status", card_status_name(v.status)}, {"link", v.link}};
}
void from_json(const Json& j, Card& v) {
  v.metric = get_string(j, "metric");
  get_opt(j, "value", v.value);
  auto s = card_status_from_name(get_string(j, "status"));
  if (!s) throw DecodeError("unknown card status");
  v.status = *s;
  v.link = get_string(j, "link");
}

void to_json(Json& j, const SummaryReport& v) {
  j = Json{{"dataset", v.dataset},
           {"provenance", opt(v.provenance)},
           {"split", opt(v.split)},
           {"toolkit_version", v.toolkit_version},
           {"generated_at", opt(v.generated_at)},
           {"cards", v.cards},
           {"notes", v.notes}};
}
void from_json(const Json& j, SummaryReport& v) {
  v.dataset = get_string(j, "dataset");
  get_opt(j, "provenance", v.provenance);
  get_opt(j, "split", v.split);
  v.toolkit_version = get_string(j, "toolkit_version");
  get_opt(j, "generated_at", v.generated_at);
  get(j, "cards", v.cards);
  get(j, "notes", v.notes);
}

void to_json(Json& j, const AuditDetails& v) {
  j = Json{{"core", opt(v.core)},
           {"temporal", opt(v.temporal)},
           {"repeats", opt(v.repeats)},
           {"core_vs_reference", opt(v.core_vs_reference)},
           {"split", opt(v.split)},
           {"leakage", v.leakage},
           {"cold_start", v.cold_start},
           {"shift", v.shift},
           {"comparison", opt(v.comparison)}};
}
void from_json(const Json& j, AuditDetails& v) {
  get_opt(j, "core", v.core);
  get_opt(j, "temporal", v.temporal);
  get_opt(j, "repeats", v.repeats);
  get_opt(j, "core_vs_reference", v.core_vs_reference);
  get_opt(j, "split", v.split);
  get(j, "leakage", v.leakage);
  get(j, "cold_start", v.cold_start);
  get(j, "shift", v.shift);
  get_opt(j, "comparison", v.comparison);
}

void to_json(Json& j, const ThresholdConfig& v) {
  j = Json::object();
  for (const auto& info : metric_table()) {
    const Threshold& t = v[info.metric];
    j[std::string(info.name)] = Json{{"warn", t.warn}, {"alert", t.alert}};
  }
}
void from_json(const Json& j, ThresholdConfig& v) {
  require_object(j);
  v = ThresholdConfig::defaults();
  for (const auto& [key, levels] : j.items()) {
    auto m = metric_from_name(key);
    if (!m) throw DecodeError("unknown threshold metric '" + key + "'");
    get(levels, "warn", v[*m].warn);
    get(levels, "alert", v[*m].alert);
  }
  try {
    v.validate();
  } catch (const Error& e) {
    throw DecodeError(e.what());
  }
}

void to_json(Json& j, const SplitSpec& v) {
  j = Json{{"strategy", strategy_name(v.strategy)},
           {"q_val", v.q_val},
           {"q_test", v.q_test},
           {"target_mode", target_mode_name(v.target_mode)},
           {"filter_cold_items", v.filter_cold_items},
           {"filter_cold_inputs", v.filter_cold_inputs},
           {"min_user_length_loo", v.min_user_length_loo}};
}
void from_json(const Json& j, SplitSpec& v) {
  const auto& strategy = get_string(j, "strategy");
  if (strategy == "leave_one_out" || strategy == "loo") {
    v.strategy = SplitStrategy::kLeaveOneOut;
  } else if (strategy == "global_temporal" || strategy == "gts") {
    v.strategy = SplitStrategy::kGlobalTemporal;
  } else {
    throw DecodeError("unknown split strategy '" + strategy + "'");
  }
  SplitSpec defaults = v.strategy == SplitStrategy::kLeaveOneOut ? SplitSpec::leave_one_out() : SplitSpec{};
  auto field = [&](const char* key, auto& out, const auto& fallback) {
    if (j.contains(key)) {
      get(j, key, out);
    } else {
      out = fallback;
    }
  };
  field("q_val", v.q_val, defaults.q_val);
  field("q_test", v.q_test, defaults.q_test);
  std::string mode = std::string(target_mode_name(defaults.target_mode));
  field("target_mode", mode, mode);
  if (mode == "last_item" || mode == "last") {
    v.target_mode = TargetMode::kLastItem;
  } else if (mode == "all_items" || mode == "all") {
    v.target_mode = TargetMode::kAllItems;
  } else {
    throw DecodeError("unknown target mode '" + mode + "'");
  }
  field("filter_cold_items", v.filter_cold_items, defaults.filter_cold_items);
  field("filter_cold_inputs", v.filter_cold_inputs, defaults.filter_cold_inputs);
  field("min_user_length_loo", v.min_user_length_loo, defaults.min_user_length_loo);
  if (v.strategy == SplitStrategy::kLeaveOneOut) v.target_mode = TargetMode::kLastItem;
  try {
    v.validate();
  } catch (const Error& e) {
    throw DecodeError(e.what());
  }
}

void to_json(Json& j, const PreprocessSpec& v) {
  j = Json{{"n_core", opt(v.n_core)},
           {"drop_consecutive_repeats", v.drop_consecutive_repeats},
           {"shuffle_collisions_seed", opt(v.shuffle_collisions_seed)}};
}
void from_json(const Json& j, PreprocessSpec& v) {
  v = PreprocessSpec{};
  if (j.contains("n_core")) get_opt(j, "n_core", v.n_core);
  if (j.contains("drop_consecutive_repeats")) get(j, "drop_consecutive_repeats", v.drop_consecutive_repeats);
  if (j.contains("shuffle_collisions_seed")) get_opt(j, "shuffle_collisions_seed", v.shuffle_collisions_seed);
  if (v.n_core && *v.n_core < 1) throw DecodeError("n_core must be >= 1");
}

void to_json(Json& j, const Provenance& v) {
  j = Json{{"source_name", v.source_name}, {"source_id", v.source_id}, {"preprocessing", v.preprocessing}};
}
void from_json(const Json& j, Provenance& v) {
  v.source_name = get_string(j, "source_name");
  v.source_id = get_string(j, "source_id");
  get(j, "preprocessing", v.preprocessing);
}

void to_json(Json& j, const ColumnMapping& v) {
  j = Json{{"user_column", v.user_column},
           {"item_column", v.item_column},
           {"timestamp_column", v.timestamp_column},
           {"timestamp_format", timestamp_format_name(v.timestamp_format)},
           {"ordinal_column", opt(v.ordinal_column)}};
}
void from_json(const Json& j, ColumnMapping& v) {
  v = ColumnMapping{};
  if (j.contains("user_column")) v.user_column = get_string(j, "user_column");
  if (j.contains("item_column")) v.item_column = get_string(j, "item_column");
  if (j.contains("timestamp_column")) v.timestamp_column = get_string(j, "timestamp_column");
  if (j.contains("timestamp_format")) {
    auto f = timestamp_format_from_name(get_string(j, "timestamp_format"));
    if (!f) throw DecodeError("unknown timestamp format");
    v.timestamp_format = *f;
  }
  if (j.contains("ordinal_column")) get_opt(j, "ordinal_column", v.ordinal_column);
  try {
    v.validate();
  } catch (const Error& e) {
    throw DecodeError(e.what());
  }
}

std::string_view document_kind(const Document& doc) { return kKinds[doc.index()]; }

Json envelope(const Document& doc) {
  Json payload;
  std::visit([&payload](const auto& v) { to_json(payload, v); }, doc);
  return Json{{"schema_version", kSchemaVersion}, {"kind", document_kind(doc)}, {"report", std::move(payload)}};
}

// Invalid UTF-8 in identifiers (e.g. Latin-1 item names) is replaced with U+FFFD
// rather than failing the whole document.
std::string to_json(const Document& doc) {
  return envelope(doc).dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

Json parse_json_text(std::string_view bytes) {
  check_depth(bytes);
  Json j = Json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kMalformedDocument, "not valid JSON");
  return j;
}

Document from_json(std::string_view bytes) {
  Json j = parse_json_text(bytes);
  try {
    if (!j.is_object()) throw DecodeError("document must be an object");
    const Json& version = j.at("schema_version");
    if (!version.is_number_integer()) throw DecodeError("schema_version must be an integer");
    if (version.get<std::int64_t>() != kSchemaVersion) {
      throw Error(ErrorCode::kSchemaVersionMismatch,
                  "schema version " + version.dump() + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
    }
    const std::string& kind = get_string(j, "kind");
    auto it = std::find(kKinds.begin(), kKinds.end(), kind);
    if (it == kKinds.end()) throw DecodeError("unknown document kind '" + kind + "'");
    return decode_kind(static_cast<std::size_t>(it - kKinds.begin()), j.at("report"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

}  // namespace splitaudit
