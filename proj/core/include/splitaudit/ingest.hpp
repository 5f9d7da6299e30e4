#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitaudit/log.hpp"

namespace splitaudit {

enum class TimestampFormat { kEpochSeconds, kEpochMillis, kIso8601 };

std::string_view timestamp_format_name(TimestampFormat f);
std::optional<TimestampFormat> timestamp_format_from_name(std::string_view name);

struct ColumnMapping {
  std::string user_column = "user_id";
  std::string item_column = "item_id";
  std::string timestamp_column = "timestamp";
  TimestampFormat timestamp_format = TimestampFormat::kEpochMillis;
  // When set, ordinals are read from this column instead of the row index.
  std::optional<std::string> ordinal_column;

  // Throws kInvalidArgument unless the mapped column names are pairwise distinct.
  void validate() const;

  // The layout written by write_log_csv.
  static ColumnMapping canonical();

  bool operator==(const ColumnMapping&) const = default;
};

struct ParseOptions {
  bool skip_malformed = false;
  // Zero data rows is an error unless set.
  bool allow_empty = false;
};

struct ParsedLog {
  InteractionLog log;
  std::size_t skipped_rows = 0;
};

struct LogSource {
  std::filesystem::path path;
  SubsetRole role = SubsetRole::kRaw;
};

// Delimited text with a header row; comma or tab, detected from the header.
ParsedLog read_log(const std::filesystem::path& path, const ColumnMapping& mapping, SubsetRole role,
                   const ParseOptions& options = {});
ParsedLog read_log_text(std::string_view text, std::string_view source_name,
                        const ColumnMapping& mapping, SubsetRole role,
                        const ParseOptions& options = {});

// Strict variant of read_log: malformed rows are fatal.
InteractionLog parse_log(const std::filesystem::path& path, const ColumnMapping& mapping,
                         SubsetRole role);

// Loads several files into logs that share one vocabulary.
std::vector<ParsedLog> read_logs(std::span<const LogSource> sources, const ColumnMapping& mapping,
                                 const ParseOptions& options = {});

// Canonical CSV: user_id,item_id,timestamp,ordinal with epoch-millisecond
// timestamps, rows in ordinal order. Re-reading with ColumnMapping::canonical()
// reproduces the log exactly.
void write_log_csv(const InteractionLog& log, std::ostream& out);
void write_log_csv(const InteractionLog& log, const std::filesystem::path& path);

}  // namespace splitaudit
