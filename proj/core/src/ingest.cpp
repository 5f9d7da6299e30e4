#include "splitaudit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "splitaudit/error.hpp"
#include "splitaudit/time_util.hpp"

namespace splitaudit {

namespace {

struct RawRow {
  std::string user;
  std::string item;
  Timestamp timestamp;
  std::uint64_t ordinal;
};

struct RawTable {
  std::vector<RawRow> rows;
  std::size_t skipped = 0;
};

// Splits one line, honouring double-quoted fields with "" escapes.
bool split_fields(std::string_view line, char delim, std::vector<std::string>& fields) {
  fields.clear();
  std::string current;
  bool quoted = false;
  bool field_start = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && field_start) {
      quoted = true;
      field_start = false;
    } else if (c == delim) {
      fields.push_back(std::move(current));
      current.clear();
      field_start = true;
    } else {
      current.push_back(c);
      field_start = false;
    }
  }
  if (quoted) return false;
  fields.push_back(std::move(current));
  return true;
}

template <typename T>
std::optional<T> parse_integer(std::string_view s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

// Decimal seconds; digits past milliseconds are truncated.
std::optional<Timestamp> parse_epoch_seconds(std::string_view s) {
  auto dot = s.find('.');
  auto whole = parse_integer<Timestamp>(s.substr(0, dot));
  if (!whole || *whole < 0 || *whole > INT64_MAX / 1000) return std::nullopt;
  Timestamp millis = 0;
  if (dot != std::string_view::npos) {
    std::string_view frac = s.substr(dot + 1);
    if (frac.empty()) return std::nullopt;
    int scale = 100;
    for (std::size_t i = 0; i < frac.size(); ++i) {
      if (frac[i] < '0' || frac[i] > '9') return std::nullopt;
      if (i < 3) millis += (frac[i] - '0') * scale;
      scale /= 10;
    }
  }
  return *whole * 1000 + millis;
}

std::optional<Timestamp> parse_timestamp(std::string_view s, TimestampFormat format) {
  switch (format) {
    case TimestampFormat::kEpochSeconds: return parse_epoch_seconds(s);
    case TimestampFormat::kEpochMillis: return parse_integer<Timestamp>(s);
    case TimestampFormat::kIso8601: return parse_iso8601(s);
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

RawTable read_table(std::string_view text, std::string_view source, const ColumnMapping& mapping,
                    const ParseOptions& options) {
  mapping.validate();
  RawTable table;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view header_line;
  if (!next_line(header_line)) {
    throw Error(ErrorCode::kEmptyLog, std::string(source) + ": no header row");
  }
  const char delim = header_line.find('\t') != std::string_view::npos ? '\t' : ',';

  std::vector<std::string> fields;
  if (!split_fields(header_line, delim, fields)) {
    throw Error(ErrorCode::kMalformedRow, std::string(source) + ":1: unterminated quote in header");
  }
  for (auto& f : fields) f = trim(f);
  auto column = [&](const std::string& name) {
    auto it = std::find(fields.begin(), fields.end(), name);
    if (it == fields.end()) {
      throw Error(ErrorCode::kMissingColumn,
                  std::string(source) + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - fields.begin());
  };
  const std::size_t n_fields = fields.size();
  const std::size_t user_col = column(mapping.user_column);
  const std::size_t item_col = column(mapping.item_column);
  const std::size_t ts_col = column(mapping.timestamp_column);
  std::optional<std::size_t> ord_col;
  if (mapping.ordinal_column) ord_col = column(*mapping.ordinal_column);

  std::unordered_set<std::uint64_t> explicit_ordinals;
  std::uint64_t row_index = 0;
  std::string_view line;
  while (next_line(line)) {
    if (line.empty()) continue;
    const std::uint64_t ordinal_from_row = row_index++;
    auto malformed = [&](const std::string& why) {
      if (options.skip_malformed) {
        ++table.skipped;
        return;
      }
      throw Error(ErrorCode::kMalformedRow,
                  std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!split_fields(line, delim, fields)) {
      malformed("unterminated quote");
      continue;
    }
    if (fields.size() != n_fields) {
      malformed("expected " + std::to_string(n_fields) + " fields, found " +
                std::to_string(fields.size()));
      continue;
    }
    const std::string ts_text = trim(fields[ts_col]);
    auto ts = parse_timestamp(ts_text, mapping.timestamp_format);
    if (!ts || *ts < 0) {
      malformed("unparseable timestamp '" + ts_text + "' for format " +
                std::string(timestamp_format_name(mapping.timestamp_format)));
      continue;
    }
    std::uint64_t ordinal = ordinal_from_row;
    if (ord_col) {
      const std::string ord_text = trim(fields[*ord_col]);
      auto parsed = parse_integer<std::uint64_t>(ord_text);
      if (!parsed) {
        malformed("unparseable ordinal '" + ord_text + "'");
        continue;
      }
      if (!explicit_ordinals.insert(*parsed).second) {
        malformed("duplicate ordinal " + ord_text);
        continue;
      }
      ordinal = *parsed;
    }
    table.rows.push_back({std::move(fields[user_col]), std::move(fields[item_col]), *ts, ordinal});
  }
  if (table.rows.empty() && !options.allow_empty) {
    throw Error(ErrorCode::kEmptyLog, std::string(source) + ": no data rows");
  }
  return table;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::shared_ptr<const Vocabulary> vocabulary_of(std::span<const RawTable> tables) {
  std::vector<std::string> users, items;
  {
    std::unordered_set<std::string_view> seen_users, seen_items;
    for (const auto& t : tables) {
      for (const auto& r : t.rows) {
        if (seen_users.insert(r.user).second) users.push_back(r.user);
        if (seen_items.insert(r.item).second) items.push_back(r.item);
      }
    }
  }
  return std::make_shared<const Vocabulary>(std::move(users), std::move(items));
}

InteractionLog intern(const RawTable& table, const std::shared_ptr<const Vocabulary>& vocab,
                      SubsetRole role) {
  std::vector<Interaction> xs;
  xs.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    xs.push_back({*vocab->find_user(r.user), *vocab->find_item(r.item), r.timestamp, r.ordinal});
  }
  return InteractionLog::build(std::move(xs), vocab, role);
}

void write_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\t\n\r") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string_view timestamp_format_name(TimestampFormat f) {
  switch (f) {
    case TimestampFormat::kEpochSeconds: return "epoch_seconds";
    case TimestampFormat::kEpochMillis: return "epoch_millis";
    case TimestampFormat::kIso8601: return "iso8601";
  }
  return "epoch_millis";
}

std::optional<TimestampFormat> timestamp_format_from_name(std::string_view name) {
  if (name == "epoch_seconds" || name == "s") return TimestampFormat::kEpochSeconds;
  if (name == "epoch_millis" || name == "ms") return TimestampFormat::kEpochMillis;
  if (name == "iso8601" || name == "iso") return TimestampFormat::kIso8601;
  return std::nullopt;
}

void ColumnMapping::validate() const {
  std::vector<std::string> names = {user_column, item_column, timestamp_column};
  if (ordinal_column) names.push_back(*ordinal_column);
  for (const auto& n : names) {
    if (n.empty()) throw Error(ErrorCode::kInvalidArgument, "column names must be non-empty");
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw Error(ErrorCode::kInvalidArgument, "mapped column names must be pairwise distinct");
  }
}

ColumnMapping ColumnMapping::canonical() {
  ColumnMapping m;
  m.ordinal_column = "ordinal";
  return m;
}

ParsedLog read_log_text(std::string_view text, std::string_view source_name,
                        const ColumnMapping& mapping, SubsetRole role, const ParseOptions& options) {
  RawTable table = read_table(text, source_name, mapping, options);
  auto vocab = vocabulary_of(std::span<const RawTable>(&table, 1));
  return {intern(table, vocab, role), table.skipped};
}

ParsedLog read_log(const std::filesystem::path& path, const ColumnMapping& mapping, SubsetRole role,
                   const ParseOptions& options) {
  const std::string text = slurp(path);
  return read_log_text(text, path.string(), mapping, role, options);
}

InteractionLog parse_log(const std::filesystem::path& path, const ColumnMapping& mapping,
                         SubsetRole role) {
  return read_log(path, mapping, role, ParseOptions{}).log;
}

std::vector<ParsedLog> read_logs(std::span<const LogSource> sources, const ColumnMapping& mapping,
                                 const ParseOptions& options) {
  std::vector<RawTable> tables;
  tables.reserve(sources.size());
  for (const auto& src : sources) {
    const std::string text = slurp(src.path);
    tables.push_back(read_table(text, src.path.string(), mapping, options));
  }
  auto vocab = vocabulary_of(tables);
  std::vector<ParsedLog> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out.push_back({intern(tables[i], vocab, sources[i].role), tables[i].skipped});
  }
  return out;
}

void write_log_csv(const InteractionLog& log, std::ostream& out) {
  std::vector<const Interaction*> rows;
  rows.reserve(log.size());
  for (const auto& x : log.interactions()) rows.push_back(&x);
  std::sort(rows.begin(), rows.end(),
            [](const Interaction* a, const Interaction* b) { return a->ordinal < b->ordinal; });
  out << "user_id,item_id,timestamp,ordinal\n";
  for (const Interaction* x : rows) {
    write_field(out, log.user_name(x->user));
    out << ',';
    write_field(out, log.item_name(x->item));
    out << ',' << x->timestamp << ',' << x->ordinal << '\n';
  }
}

void write_log_csv(const InteractionLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_log_csv(log, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace splitaudit
