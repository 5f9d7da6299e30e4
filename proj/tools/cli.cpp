#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitaudit/diagnostics.hpp"
#include "splitaudit/error.hpp"
#include "splitaudit/ingest.hpp"
#include "splitaudit/preprocess.hpp"
#include "splitaudit/report.hpp"
#include "splitaudit/serialize.hpp"
#include "splitaudit/server.hpp"
#include "splitaudit/split.hpp"
#include "splitaudit/stats.hpp"
#include "splitaudit/time_util.hpp"
#include "splitaudit/version.hpp"

namespace splitaudit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kThresholdsEnv = "SPLITAUDIT_THRESHOLDS";
constexpr std::array<SubsetRole, 5> kBundleRoles = {SubsetRole::kTrain, SubsetRole::kValInput,
                                                    SubsetRole::kValTarget, SubsetRole::kTestInput,
                                                    SubsetRole::kTestTarget};

struct Flags {
  // inputs
  std::string input;
  std::string reference;
  std::string source;
  std::vector<std::string> bundle_dirs;
  std::vector<std::string> specs;
  std::string config;
  std::string name;
  std::string prefix = "split";

  // column mapping
  std::string user_col = "user_id";
  std::string item_col = "item_id";
  std::string time_col = "timestamp";
  std::string time_format = "epoch_millis";
  std::string ordinal_col;
  bool skip_malformed = false;

  // preprocessing
  std::uint32_t n_core = 0;
  bool drop_consecutive = false;
  std::uint64_t shuffle_seed = 0;

  // split
  std::string strategy = "gts";
  double q_val = 0.8;
  double q_test = 0.9;
  std::string target = "all";
  bool keep_cold = false;
  bool strict_cold = false;
  std::uint32_t min_user_length = 3;

  // reporting
  std::string out_dir;
  std::string format = "both";
  std::string thresholds;
  std::string granularity = "day";
  std::string date_range;
  bool fail_on_alert = false;
  bool allow_provenance_mismatch = false;
  std::string generated_at;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_root;
  std::size_t max_upload_mb = 64;
  std::string cors_origin = "*";
};

// Options whose presence matters when merging with --config.
struct Seen {
  CLI::Option* user_col = nullptr;
  CLI::Option* item_col = nullptr;
  CLI::Option* time_col = nullptr;
  CLI::Option* time_format = nullptr;
  CLI::Option* ordinal_col = nullptr;
  CLI::Option* n_core = nullptr;
  CLI::Option* drop_consecutive = nullptr;
  CLI::Option* shuffle_seed = nullptr;
  CLI::Option* strategy = nullptr;
  CLI::Option* q_val = nullptr;
  CLI::Option* q_test = nullptr;
  CLI::Option* target = nullptr;
  CLI::Option* keep_cold = nullptr;
  CLI::Option* strict_cold = nullptr;
  CLI::Option* min_user_length = nullptr;
};

bool given(const CLI::Option* o) { return o && o->count() > 0; }

enum class Format { kJson, kMarkdown, kBoth };

struct Plan {
  ColumnMapping mapping;
  ParseOptions parse;
  PreprocessSpec preprocess;
  SplitSpec split;
  Format format = Format::kBoth;
  Granularity granularity = Granularity::kDay;
  std::optional<TimeRange> range;
  std::optional<std::string> generated_at;
};

[[noreturn]] void usage(const std::string& message) { throw Error(ErrorCode::kInvalidArgument, message); }

Timestamp parse_instant(const std::string& text) {
  std::int64_t ms = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
  if (ec == std::errc() && end == text.data() + text.size()) return ms;
  if (auto ts = parse_iso8601(text)) return *ts;
  usage("'" + text + "' is neither epoch milliseconds nor an ISO-8601 time");
}

// Pure checks on flag values; runs before any file is touched.
Plan plan_from_flags(const Flags& f, const Seen& seen) {
  Plan p;
  p.mapping.user_column = f.user_col;
  p.mapping.item_column = f.item_col;
  p.mapping.timestamp_column = f.time_col;
  auto tf = timestamp_format_from_name(f.time_format);
  if (!tf) usage("--time-format must be epoch_seconds, epoch_millis or iso8601");
  p.mapping.timestamp_format = *tf;
  if (!f.ordinal_col.empty()) p.mapping.ordinal_column = f.ordinal_col;
  p.mapping.validate();
  p.parse.skip_malformed = f.skip_malformed;

  if (given(seen.n_core)) p.preprocess.n_core = f.n_core;
  p.preprocess.drop_consecutive_repeats = f.drop_consecutive;
  if (given(seen.shuffle_seed)) p.preprocess.shuffle_collisions_seed = f.shuffle_seed;
  p.preprocess.validate();

  if (f.strategy == "loo" || f.strategy == "leave_one_out") {
    p.split = SplitSpec::leave_one_out();
    if (given(seen.q_val) || given(seen.q_test)) usage("--q-val/--q-test apply to --split gts only");
    if (given(seen.target) && f.target != "last") usage("leave-one-out always targets the last item");
    p.split.min_user_length_loo = f.min_user_length;
  } else if (f.strategy == "gts" || f.strategy == "global_temporal") {
    if (f.target != "last" && f.target != "all" && f.target != "last_item" && f.target != "all_items") {
      usage("--target must be last or all");
    }
    p.split = SplitSpec::global_temporal(f.q_val, f.q_test,
                                         f.target.starts_with("last") ? TargetMode::kLastItem : TargetMode::kAllItems);
    if (given(seen.min_user_length)) usage("--min-user-length applies to --split loo only");
  } else {
    usage("--split must be loo or gts");
  }
  if (f.keep_cold && f.strict_cold) usage("--keep-cold and --strict-cold are mutually exclusive");
  p.split.filter_cold_items = !f.keep_cold;
  p.split.filter_cold_inputs = f.strict_cold;
  p.split.validate();

  if (f.format == "json") {
    p.format = Format::kJson;
  } else if (f.format == "markdown" || f.format == "md") {
    p.format = Format::kMarkdown;
  } else if (f.format == "both") {
    p.format = Format::kBoth;
  } else {
    usage("--format must be json, markdown or both");
  }
  auto g = granularity_from_name(f.granularity);
  if (!g) usage("--granularity must be hour, day, week or month");
  p.granularity = *g;
  if (!f.date_range.empty()) {
    const auto sep = f.date_range.find("..");
    if (sep == std::string::npos) usage("--date-range must look like START..END");
    p.range = TimeRange{parse_instant(f.date_range.substr(0, sep)), parse_instant(f.date_range.substr(sep + 2))};
    if (p.range->start > p.range->end) throw Error(ErrorCode::kInvalidRange, "--date-range start is after its end");
  }
  if (!f.generated_at.empty()) {
    p.generated_at = format_iso8601(parse_instant(f.generated_at));
  } else if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    p.generated_at = format_iso8601(parse_instant(epoch) * 1000);
  }
  return p;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

// Wraps a bare payload so the public document decoder can read it.
template <typename T>
T decode_section(const json& j, std::string_view kind) {
  if (j.is_object() && j.contains("schema_version")) return from_json_as<T>(j.dump());
  json doc{{"schema_version", kSchemaVersion}, {"kind", kind}, {"report", j}};
  return from_json_as<T>(doc.dump());
}

// Config values apply wherever the corresponding flag was not given.
void merge_config(Plan& p, const Flags& f, const Seen& seen) {
  if (f.config.empty()) return;
  json cfg = json::parse(read_text(f.config), nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, f.config + ": config must be a JSON object");
  }
  for (const auto& [key, value] : cfg.items()) {
    if (key != "mapping" && key != "preprocess" && key != "split") {
      throw Error(ErrorCode::kMalformedDocument, f.config + ": unknown section '" + key + "'");
    }
  }
  try {
    if (cfg.contains("mapping")) {
      const json& m = cfg.at("mapping");
      if (!given(seen.user_col) && m.contains("user_column")) p.mapping.user_column = m.at("user_column");
      if (!given(seen.item_col) && m.contains("item_column")) p.mapping.item_column = m.at("item_column");
      if (!given(seen.time_col) && m.contains("timestamp_column")) p.mapping.timestamp_column = m.at("timestamp_column");
      if (!given(seen.time_format) && m.contains("timestamp_format")) {
        auto tf = timestamp_format_from_name(m.at("timestamp_format").get<std::string>());
        if (!tf) throw Error(ErrorCode::kMalformedDocument, f.config + ": unknown timestamp_format");
        p.mapping.timestamp_format = *tf;
      }
      if (!given(seen.ordinal_col) && m.contains("ordinal_column") && !m.at("ordinal_column").is_null()) {
        p.mapping.ordinal_column = m.at("ordinal_column").get<std::string>();
      }
    }
    if (cfg.contains("preprocess")) {
      const auto c = decode_section<PreprocessSpec>(cfg.at("preprocess"), "preprocess_spec");
      if (!given(seen.n_core)) p.preprocess.n_core = c.n_core;
      if (!given(seen.drop_consecutive)) p.preprocess.drop_consecutive_repeats = c.drop_consecutive_repeats;
      if (!given(seen.shuffle_seed)) p.preprocess.shuffle_collisions_seed = c.shuffle_collisions_seed;
    }
    if (cfg.contains("split")) {
      const auto c = decode_section<SplitSpec>(cfg.at("split"), "split_spec");
      if (!given(seen.strategy)) {
        const bool keep_mode = given(seen.target);
        const TargetMode mode = p.split.target_mode;
        p.split.strategy = c.strategy;
        p.split.target_mode = keep_mode ? mode : c.target_mode;
        if (c.strategy == SplitStrategy::kLeaveOneOut) p.split.target_mode = TargetMode::kLastItem;
      } else if (!given(seen.target) && p.split.strategy == SplitStrategy::kGlobalTemporal) {
        p.split.target_mode = c.target_mode;
      }
      if (!given(seen.q_val)) p.split.q_val = c.q_val;
      if (!given(seen.q_test)) p.split.q_test = c.q_test;
      if (!given(seen.keep_cold)) p.split.filter_cold_items = c.filter_cold_items;
      if (!given(seen.strict_cold)) p.split.filter_cold_inputs = c.filter_cold_inputs;
      if (!given(seen.min_user_length)) p.split.min_user_length_loo = c.min_user_length_loo;
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, f.config + ": " + e.what());
  }
  p.mapping.validate();
  p.preprocess.validate();
  p.split.validate();
}

ThresholdConfig load_thresholds(const Flags& f) {
  std::string path = f.thresholds;
  if (path.empty()) {
    if (const char* env = std::getenv(kThresholdsEnv); env && *env) path = env;
  }
  if (path.empty()) return ThresholdConfig::defaults();
  auto t = from_json_as<ThresholdConfig>(read_text(path));
  t.validate();
  return t;
}

std::string dataset_name(const Flags& f, const std::string& path) {
  return f.name.empty() ? fs::path(path).filename().string() : f.name;
}

struct LoadedInput {
  InteractionLog raw;
  InteractionLog source;  // after preprocessing
  Provenance provenance;
};

LoadedInput load_input(const Flags& f, const Plan& p, std::ostream& err) {
  LoadedInput in;
  auto parsed = read_log(f.input, p.mapping, SubsetRole::kRaw, p.parse);
  if (parsed.skipped_rows > 0) err << "warning: skipped " << parsed.skipped_rows << " malformed rows in " << f.input << '\n';
  in.raw = std::move(parsed.log);
  in.source = preprocess(in.raw, p.preprocess);
  in.provenance = {dataset_name(f, f.input), log_fingerprint(in.raw), p.preprocess};
  return in;
}

// True when the file's header row names `column`.
bool header_has(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return false;
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, delim)) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    if (cell == column) return true;
  }
  return false;
}

std::string detect_prefix(const fs::path& dir, const Flags& f, bool prefix_given) {
  if (prefix_given) return f.prefix;
  std::vector<std::string> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    const std::string suffix = "_train.csv";
    if (name.size() > suffix.size() && name.ends_with(suffix)) found.push_back(name.substr(0, name.size() - suffix.size()));
  }
  if (found.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, dir.string() + ": expected exactly one <prefix>_train.csv, found " +
                                                 std::to_string(found.size()) + "; use --prefix");
  }
  return found.front();
}

struct LoadedBundle {
  std::string name;
  SplitBundle bundle;
  InteractionLog source;
};

LoadedBundle load_bundle(const std::string& dir_text, const Flags& f, const Plan& p, bool prefix_given,
                         std::ostream& err) {
  const fs::path dir(dir_text);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir_text + " is not a directory");
  const std::string prefix = detect_prefix(dir, f, prefix_given);
  std::vector<LogSource> sources;
  for (SubsetRole role : kBundleRoles) {
    sources.push_back({dir / (prefix + "_" + std::string(role_name(role)) + ".csv"), role});
  }
  ColumnMapping mapping = p.mapping;
  if (!mapping.ordinal_column && header_has(sources.front().path, "ordinal")) mapping.ordinal_column = "ordinal";
  ParseOptions parse = p.parse;
  parse.allow_empty = true;
  auto logs = read_logs(sources, mapping, parse);

  LoadedBundle out;
  out.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  auto& b = out.bundle;
  b.train = std::move(logs[0].log);
  b.val_input = std::move(logs[1].log);
  b.val_target = std::move(logs[2].log);
  b.test_input = std::move(logs[3].log);
  b.test_target = std::move(logs[4].log);
  if (fs::exists(dir / "split.json")) {
    b.spec = from_json_as<SplitSpec>(read_text(dir / "split.json"));
  } else {
    err << "warning: " << dir_text << " has no split.json; the split specification is unknown\n";
  }
  out.source = reconstruct_source(b);
  if (fs::exists(dir / "provenance.json")) {
    b.provenance = from_json_as<Provenance>(read_text(dir / "provenance.json"));
  } else {
    b.provenance = {out.name, log_fingerprint(out.source), {}};
  }
  return out;
}

std::optional<InteractionLog> load_reference(const Flags& f, const Plan& p) {
  if (f.reference.empty()) return std::nullopt;
  return read_log(f.reference, p.mapping, SubsetRole::kRaw, p.parse).log;
}

struct Output {
  fs::path dir;
  Format format;
  bool to_stdout() const { return dir.empty(); }
  bool json() const { return format != Format::kMarkdown; }
  bool markdown() const { return format != Format::kJson; }
};

Output prepare_output(const Flags& f, const Plan& p) {
  Output o{f.out_dir, p.format};
  if (!o.dir.empty()) fs::create_directories(o.dir);
  return o;
}

std::string spec_label(const SplitSpec& s) {
  if (s.strategy == SplitStrategy::kLeaveOneOut) return "loo";
  char buf[64];
  std::snprintf(buf, sizeof buf, "gts-%g-%g-%s", s.q_val, s.q_test,
                s.target_mode == TargetMode::kLastItem ? "last" : "all");
  return buf;
}

// "loo[:MIN_LEN]" or "gts[:Q_VAL:Q_TEST[:last|all]]", or a split_spec document path.
SplitSpec parse_spec_argument(const std::string& text, const Plan& p) {
  if (fs::is_regular_file(text)) return from_json_as<SplitSpec>(read_text(text));
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  SplitSpec s;
  try {
    if (!parts.empty() && parts[0] == "loo" && parts.size() <= 2) {
      s = SplitSpec::leave_one_out();
      if (parts.size() == 2) s.min_user_length_loo = static_cast<std::uint32_t>(std::stoul(parts[1]));
    } else if (!parts.empty() && parts[0] == "gts" && parts.size() != 2 && parts.size() <= 4) {
      s = SplitSpec::global_temporal(0.8, 0.9, TargetMode::kAllItems);
      if (parts.size() >= 3) {
        s.q_val = std::stod(parts[1]);
        s.q_test = std::stod(parts[2]);
      }
      if (parts.size() == 4) {
        if (parts[3] != "last" && parts[3] != "all") usage("spec '" + text + "': target must be last or all");
        s.target_mode = parts[3] == "last" ? TargetMode::kLastItem : TargetMode::kAllItems;
      }
    } else {
      usage("spec '" + text + "' is not loo[:N], gts[:Q_VAL:Q_TEST[:last|all]] or a split_spec file");
    }
  } catch (const std::logic_error&) {
    usage("spec '" + text + "' has a malformed number");
  }
  s.filter_cold_items = p.split.filter_cold_items;
  s.filter_cold_inputs = p.split.filter_cold_inputs;
  s.validate();
  return s;
}

void print_cards(const SummaryReport& s, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& c : s.cards) width = std::max(width, c.metric.size());
  for (const auto& c : s.cards) {
    out << c.metric << std::string(width - c.metric.size() + 2, ' ');
    const std::string v = c.value ? format_value(*c.value) : "-";
    out << std::string(v.size() < 14 ? 14 - v.size() : 0, ' ') << v << "  " << card_status_name(c.status) << '\n';
  }
}

void print_description(const SplitDescription& d, std::ostream& out) {
  out << "role          users      items  interactions  start                     end\n";
  for (const auto& r : d.roles) {
    char line[256];
    std::snprintf(line, sizeof line, "%-11s %7llu %10llu %13llu  %-24s  %s\n", std::string(role_name(r.role)).c_str(),
                  static_cast<unsigned long long>(r.n_users), static_cast<unsigned long long>(r.n_items),
                  static_cast<unsigned long long>(r.n_interactions),
                  r.start_ts ? format_iso8601(*r.start_ts).c_str() : "-", r.end_ts ? format_iso8601(*r.end_ts).c_str() : "-");
    out << line;
  }
  out << "validation users without input: " << d.val_users_without_input << '\n';
  out << "test users without input: " << d.test_users_without_input << '\n';
}

int cmd_stats(const Flags& f, const Plan& p, std::ostream& out, std::ostream& err) {
  const auto in = load_input(f, p, err);
  const auto reference = load_reference(f, p);
  const Output o = prepare_output(f, p);

  AuditDetails d;
  d.core = core_stats(in.source);
  d.temporal = temporal_stats(in.source);
  d.repeats = repeat_stats(in.source);
  std::optional<ComparisonTable> temporal_cmp, repeat_cmp;
  if (reference) {
    d.core_vs_reference = compare_stats(*d.core, core_stats(*reference));
    temporal_cmp = compare_stats(*d.temporal, temporal_stats(*reference));
    repeat_cmp = compare_stats(*d.repeats, repeat_stats(*reference));
  }
  std::vector<NamedLog> roles{{std::string(role_name(in.source.role())), &in.source}};
  if (reference) roles.push_back({"reference", &*reference});
  const auto tl = timeline(roles, p.granularity, p.range);

  SummaryIdentity identity{in.provenance.source_name, in.provenance, std::nullopt, p.generated_at};
  const auto summary = summarize(d, load_thresholds(f), identity);
  const std::string md = render_markdown(summary, d);

  if (o.to_stdout()) {
    out << (o.markdown() ? md : to_json(d));
    return kExitOk;
  }
  if (o.json()) {
    write_text(o.dir / "core_stats.json", to_json(*d.core));
    write_text(o.dir / "temporal_stats.json", to_json(*d.temporal));
    write_text(o.dir / "repeat_stats.json", to_json(*d.repeats));
    write_text(o.dir / "timeline.json", to_json(tl));
    if (reference) {
      write_text(o.dir / "comparison_core_stats.json", to_json(*d.core_vs_reference));
      write_text(o.dir / "comparison_temporal_stats.json", to_json(*temporal_cmp));
      write_text(o.dir / "comparison_repeat_stats.json", to_json(*repeat_cmp));
    }
  }
  if (o.markdown()) write_text(o.dir / "stats.md", md);
  print_cards(summary, out);
  return kExitOk;
}

int cmd_split(const Flags& f, const Plan& p, std::ostream& out, std::ostream& err) {
  if (f.out_dir.empty()) usage("split needs --out-dir");
  const auto in = load_input(f, p, err);
  const auto bundle = make_split(in.source, p.split, in.provenance);
  const Output o = prepare_output(f, p);
  for (SubsetRole role : kBundleRoles) {
    write_log_csv(bundle.subset(role), o.dir / (f.prefix + "_" + std::string(role_name(role)) + ".csv"));
  }
  write_text(o.dir / "split.json", to_json(bundle.spec));
  write_text(o.dir / "provenance.json", to_json(bundle.provenance));
  const auto description = describe_split(bundle);
  write_text(o.dir / "split_description.json", to_json(description));
  print_description(description, out);
  return kExitOk;
}

int cmd_audit(const Flags& f, const Plan& p, bool prefix_given, std::ostream& out, std::ostream& err) {
  SplitBundle bundle;
  InteractionLog source;
  std::string name;
  if (!f.bundle_dirs.empty()) {
    auto loaded = load_bundle(f.bundle_dirs.front(), f, p, prefix_given, err);
    bundle = std::move(loaded.bundle);
    source = std::move(loaded.source);
    name = f.name.empty() ? loaded.name : f.name;
    if (!f.source.empty()) source = read_log(f.source, p.mapping, SubsetRole::kPreprocessed, p.parse).log;
  } else {
    auto in = load_input(f, p, err);
    bundle = make_split(in.source, p.split, in.provenance);
    source = std::move(in.source);
    name = in.provenance.source_name;
  }
  const auto reference = load_reference(f, p);
  const auto thresholds = load_thresholds(f);
  const Output o = prepare_output(f, p);

  AuditOptions opts;
  opts.granularity = p.granularity;
  opts.reference = reference ? &*reference : nullptr;
  const AuditDetails details = run_audit(source, &bundle, opts);
  SummaryIdentity identity{name, bundle.provenance, bundle.spec, p.generated_at};
  const SummaryReport summary = summarize(details, thresholds, identity);
  const std::string md = render_markdown(summary, details);

  if (o.to_stdout()) {
    out << (o.markdown() ? md : to_json(summary));
  } else {
    if (o.json()) {
      write_text(o.dir / "summary.json", to_json(summary));
      write_text(o.dir / "audit_details.json", to_json(details));
    }
    if (o.markdown()) write_text(o.dir / "audit.md", md);
    print_cards(summary, out);
  }
  if (f.fail_on_alert && worst_status(summary) == CardStatus::kAlert) {
    err << "audit: at least one card is in alert state\n";
    return kExitAlert;
  }
  return kExitOk;
}

int cmd_compare(const Flags& f, const Plan& p, bool prefix_given, std::ostream& out, std::ostream& err) {
  std::vector<LoadedBundle> bundles;
  std::optional<InteractionLog> shared_source;
  if (!f.bundle_dirs.empty()) {
    for (const auto& dir : f.bundle_dirs) bundles.push_back(load_bundle(dir, f, p, prefix_given, err));
  } else {
    std::vector<SplitSpec> specs;
    for (const auto& s : f.specs) specs.push_back(parse_spec_argument(s, p));
    auto in = load_input(f, p, err);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      LoadedBundle b;
      b.name = spec_label(specs[i]);
      b.bundle = make_split(in.source, specs[i], in.provenance);
      bundles.push_back(std::move(b));
    }
    shared_source = std::move(in.source);
  }
  const auto reference = load_reference(f, p);
  const Output o = prepare_output(f, p);

  std::vector<NamedBundle> named;
  for (const auto& b : bundles) named.push_back({b.name, &b.bundle});
  const InteractionLog* ref = reference ? &*reference : (shared_source ? &*shared_source : &bundles.front().source);
  CompareOptions opts;
  opts.allow_provenance_mismatch = f.allow_provenance_mismatch;
  const auto matrix = compare_splits(named, ref, opts);

  if (o.to_stdout()) {
    out << (o.format == Format::kJson ? to_json(matrix) : render_comparison_text(matrix));
    return kExitOk;
  }
  if (o.json()) write_text(o.dir / "split_comparison.json", to_json(matrix));
  if (o.markdown()) write_text(o.dir / "comparison.md", render_comparison_markdown(matrix));
  out << render_comparison_text(matrix);
  return kExitOk;
}

int cmd_serve(const Flags& f, std::ostream& out) {
  ServerOptions opts;
  opts.host = f.host;
  opts.port = f.port;
  opts.max_upload_bytes = f.max_upload_mb << 20;
  opts.cors_origin = f.cors_origin;
  if (!f.data_root.empty()) opts.data_root = f.data_root;
  ApiServer server(opts);
  const int port = server.bind();
  out << "serving /api/v1 on http://" << f.host << ":" << port << std::endl;
  server.serve();
  return kExitOk;
}

void add_mapping(CLI::App* app, Flags& f, Seen& seen) {
  seen.user_col = app->add_option("--user-col", f.user_col, "User id column")->capture_default_str();
  seen.item_col = app->add_option("--item-col", f.item_col, "Item id column")->capture_default_str();
  seen.time_col = app->add_option("--time-col", f.time_col, "Timestamp column")->capture_default_str();
  seen.time_format = app->add_option("--time-format", f.time_format, "epoch_seconds|epoch_millis|iso8601 (s, ms, iso)")
                         ->capture_default_str();
  seen.ordinal_col = app->add_option("--ordinal-col", f.ordinal_col, "Column holding tie-breaking ordinals");
  app->add_flag("--skip-malformed", f.skip_malformed, "Skip malformed rows instead of failing");
}

void add_preprocess(CLI::App* app, Flags& f, Seen& seen) {
  seen.n_core = app->add_option("--n-core", f.n_core, "Iterative n-core filter (counts interactions)")
                    ->check(CLI::PositiveNumber);
  seen.drop_consecutive = app->add_flag("--drop-consecutive", f.drop_consecutive, "Drop consecutive repeats");
  seen.shuffle_seed = app->add_option("--shuffle-collisions-seed", f.shuffle_seed,
                                      "Shuffle same-timestamp groups with this seed");
}

void add_split(CLI::App* app, Flags& f, Seen& seen) {
  seen.strategy = app->add_option("--split", f.strategy, "loo|gts")->capture_default_str();
  seen.q_val = app->add_option("--q-val", f.q_val, "Validation cut quantile (gts)")->capture_default_str();
  seen.q_test = app->add_option("--q-test", f.q_test, "Test cut quantile (gts)")->capture_default_str();
  seen.target = app->add_option("--target", f.target, "last|all (gts)")->capture_default_str();
  seen.keep_cold = app->add_flag("--keep-cold", f.keep_cold, "Keep targets on items absent from train");
  seen.strict_cold = app->add_flag("--strict-cold", f.strict_cold, "Also drop cold items from evaluation inputs");
  seen.min_user_length = app->add_option("--min-user-length", f.min_user_length, "Leave-one-out eligibility (>= 3)")
                             ->capture_default_str();
  app->add_option("--config", f.config, "JSON with mapping/preprocess/split sections")->check(CLI::ExistingFile);
}

void add_output(CLI::App* app, Flags& f, bool with_thresholds) {
  app->add_option("--out-dir", f.out_dir, "Directory for report files (stdout when absent)");
  app->add_option("--format", f.format, "json|markdown|both")->capture_default_str();
  app->add_option("--granularity", f.granularity, "hour|day|week|month")->capture_default_str();
  if (with_thresholds) {
    app->add_option("--thresholds", f.thresholds, "Threshold document (default: $SPLITAUDIT_THRESHOLDS)")
        ->check(CLI::ExistingFile);
    app->add_option("--generated-at", f.generated_at, "Timestamp recorded in summaries (default: $SOURCE_DATE_EPOCH)");
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  std::map<const CLI::App*, Seen> seen_by;
  CLI::App app{"Audit interaction logs and evaluation splits for recommender systems", "splitaudit"};
  app.set_version_flag("--version", kToolkitVersion);
  app.require_subcommand(1);

  auto* stats = app.add_subcommand("stats", "Dataset statistics for one log, optionally against a reference");
  stats->add_option("input", f.input, "Interaction log (CSV/TSV)")->required()->check(CLI::ExistingFile);
  stats->add_option("--reference", f.reference, "Reference log to compare with")->check(CLI::ExistingFile);
  stats->add_option("--date-range", f.date_range, "Timeline range START..END (ISO-8601 or epoch ms)");
  stats->add_option("--name", f.name, "Dataset name in reports");
  add_mapping(stats, f, seen_by[stats]);
  add_preprocess(stats, f, seen_by[stats]);
  stats->add_option("--config", f.config, "JSON with mapping/preprocess/split sections")->check(CLI::ExistingFile);
  add_output(stats, f, true);

  auto* split = app.add_subcommand("split", "Materialize a split bundle as five CSV files");
  split->add_option("input", f.input, "Interaction log (CSV/TSV)")->required()->check(CLI::ExistingFile);
  auto* split_prefix = split->add_option("--prefix", f.prefix, "File name prefix")->capture_default_str();
  split->add_option("--name", f.name, "Dataset name recorded in provenance");
  add_mapping(split, f, seen_by[split]);
  add_preprocess(split, f, seen_by[split]);
  add_split(split, f, seen_by[split]);
  split->add_option("--out-dir", f.out_dir, "Bundle directory")->required();

  auto* audit = app.add_subcommand("audit", "Full diagnostics and threshold summary for a split");
  auto* audit_input = audit->add_option("input", f.input, "Raw interaction log to split")->check(CLI::ExistingFile);
  auto* audit_bundle = audit->add_option("--bundle-dir", f.bundle_dirs, "Existing bundle directory")
                           ->check(CLI::ExistingDirectory)
                           ->expected(1);
  audit_input->excludes(audit_bundle);
  auto* audit_prefix = audit->add_option("--prefix", f.prefix, "Bundle file prefix (detected when absent)");
  audit->add_option("--source", f.source, "Log the bundle was split from (bundle mode)")->check(CLI::ExistingFile);
  audit->add_option("--reference", f.reference, "Reference log for comparisons and shift")->check(CLI::ExistingFile);
  audit->add_option("--name", f.name, "Dataset name in reports");
  audit->add_flag("--fail-on-alert", f.fail_on_alert, "Exit with status 2 when any card is in alert");
  add_mapping(audit, f, seen_by[audit]);
  add_preprocess(audit, f, seen_by[audit]);
  add_split(audit, f, seen_by[audit]);
  add_output(audit, f, true);

  auto* compare = app.add_subcommand("compare", "Compare several splits side by side");
  auto* compare_input = compare->add_option("input", f.input, "Raw interaction log")->check(CLI::ExistingFile);
  auto* compare_bundles = compare->add_option("--bundle-dir", f.bundle_dirs, "Bundle directory (repeatable)")
                              ->check(CLI::ExistingDirectory);
  auto* compare_specs = compare->add_option("--spec", f.specs, "loo[:N], gts[:QV:QT[:last|all]] or split_spec file");
  compare_input->excludes(compare_bundles);
  compare_specs->excludes(compare_bundles);
  auto* compare_prefix = compare->add_option("--prefix", f.prefix, "Bundle file prefix (detected when absent)");
  compare->add_option("--reference", f.reference, "Reference log for shift")->check(CLI::ExistingFile);
  compare->add_flag("--allow-provenance-mismatch", f.allow_provenance_mismatch, "Warn instead of failing");
  add_mapping(compare, f, seen_by[compare]);
  add_preprocess(compare, f, seen_by[compare]);
  add_split(compare, f, seen_by[compare]);
  add_output(compare, f, false);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--host", f.host, "Bind address")->capture_default_str();
  serve->add_option("--port", f.port, "Port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--data-root", f.data_root, "Directory from which datasets may be registered by path")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--max-upload-mb", f.max_upload_mb, "Request body limit")->capture_default_str();
  serve->add_option("--cors-origin", f.cors_origin, "Access-Control-Allow-Origin value")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (serve->parsed()) return cmd_serve(f, out);
    const Seen& seen = seen_by[app.get_subcommands().front()];
    Plan plan = plan_from_flags(f, seen);
    if (audit->parsed() && f.input.empty() && f.bundle_dirs.empty()) usage("audit needs an input log or --bundle-dir");
    if (compare->parsed()) {
      if (f.bundle_dirs.empty() && f.input.empty()) usage("compare needs an input log with --spec, or --bundle-dir");
      if (!f.bundle_dirs.empty() && f.bundle_dirs.size() < 2) usage("compare needs at least two --bundle-dir");
      if (!f.input.empty() && f.specs.size() < 2) usage("compare needs at least two --spec");
    }
    merge_config(plan, f, seen);
    if (stats->parsed()) return cmd_stats(f, plan, out, err);
    if (split->parsed()) {
      (void)split_prefix;
      return cmd_split(f, plan, out, err);
    }
    if (audit->parsed()) return cmd_audit(f, plan, audit_prefix->count() > 0, out, err);
    return cmd_compare(f, plan, compare_prefix->count() > 0, out, err);
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace splitaudit::cli
