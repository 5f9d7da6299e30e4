#include "splitaudit/time_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace splitaudit {

namespace {

namespace chr = std::chrono;

constexpr Timestamp kHourMs = 3'600'000;
constexpr Timestamp kDayMs = 24 * kHourMs;

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Timestamp day_start(chr::year_month_day ymd) {
  return chr::sys_days(ymd).time_since_epoch().count() * kDayMs;
}

bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += count;
  out = v;
  return true;
}

}  // namespace

std::string_view granularity_name(Granularity g) {
  switch (g) {
    case Granularity::kHour: return "hour";
    case Granularity::kDay: return "day";
    case Granularity::kWeek: return "week";
    case Granularity::kMonth: return "month";
  }
  return "day";
}

std::optional<Granularity> granularity_from_name(std::string_view name) {
  if (name == "hour") return Granularity::kHour;
  if (name == "day") return Granularity::kDay;
  if (name == "week") return Granularity::kWeek;
  if (name == "month") return Granularity::kMonth;
  return std::nullopt;
}

Timestamp bucket_floor(Timestamp ts, Granularity g) {
  switch (g) {
    case Granularity::kHour: return floor_div(ts, kHourMs) * kHourMs;
    case Granularity::kDay: return floor_div(ts, kDayMs) * kDayMs;
    case Granularity::kWeek: {
      // 1970-01-01 was a Thursday; Monday 1969-12-29 is day -3.
      Timestamp days = floor_div(ts, kDayMs);
      Timestamp week = floor_div(days + 3, 7);
      return (week * 7 - 3) * kDayMs;
    }
    case Granularity::kMonth: {
      chr::sys_days day{chr::days{floor_div(ts, kDayMs)}};
      chr::year_month_day ymd{day};
      return day_start(ymd.year() / ymd.month() / chr::day{1});
    }
  }
  return ts;
}

Timestamp bucket_next(Timestamp bucket_start, Granularity g) {
  switch (g) {
    case Granularity::kHour: return bucket_start + kHourMs;
    case Granularity::kDay: return bucket_start + kDayMs;
    case Granularity::kWeek: return bucket_start + 7 * kDayMs;
    case Granularity::kMonth: {
      chr::sys_days day{chr::days{floor_div(bucket_start, kDayMs)}};
      chr::year_month_day ymd{day};
      chr::year_month next = ymd.year() / ymd.month() + chr::months{1};
      return day_start(next / chr::day{1});
    }
  }
  return bucket_start;
}

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  std::size_t pos = 0;
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!read_digits(s, pos, 4, year)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!read_digits(s, pos, 2, month)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!read_digits(s, pos, 2, day)) return std::nullopt;

  chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                          chr::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;

  Timestamp millis = 0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (!read_digits(s, pos, 2, hour)) return std::nullopt;
    if (pos >= s.size() || s[pos++] != ':') return std::nullopt;
    if (!read_digits(s, pos, 2, minute)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!read_digits(s, pos, 2, second)) return std::nullopt;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        std::size_t digits = 0;
        int scale = 100;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          // Sub-millisecond digits are truncated.
          if (digits < 3) millis += (s[pos] - '0') * scale;
          scale /= 10;
          ++digits;
          ++pos;
        }
        if (digits == 0) return std::nullopt;
      }
    }
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
  }

  Timestamp offset_ms = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      ++pos;
      int oh = 0, om = 0;
      if (!read_digits(s, pos, 2, oh)) return std::nullopt;
      if (pos < s.size() && s[pos] == ':') ++pos;
      if (!read_digits(s, pos, 2, om)) return std::nullopt;
      if (oh > 23 || om > 59) return std::nullopt;
      offset_ms = (oh * 60 + om) * 60'000LL * (c == '+' ? 1 : -1);
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;

  return day_start(ymd) + hour * kHourMs + minute * 60'000LL + second * 1000LL + millis - offset_ms;
}

std::string format_iso8601(Timestamp ts) {
  Timestamp days = floor_div(ts, kDayMs);
  Timestamp rem = ts - days * kDayMs;
  chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(rem / kHourMs), static_cast<long long>(rem / 60'000 % 60),
                static_cast<long long>(rem / 1000 % 60), static_cast<long long>(rem % 1000));
  return buf;
}

std::string format_duration(double millis) {
  struct Unit {
    const char* name;
    double ms;
  };
  static constexpr Unit kUnits[] = {
      {"y", 365.0 * 86'400'000.0}, {"d", 86'400'000.0}, {"h", 3'600'000.0}, {"m", 60'000.0}};
  char buf[48];
  double magnitude = std::fabs(millis);
  for (const auto& unit : kUnits) {
    if (magnitude >= unit.ms) {
      std::snprintf(buf, sizeof buf, "%.2f %s", millis / unit.ms, unit.name);
      return buf;
    }
  }
  std::snprintf(buf, sizeof buf, "%.2f s", millis / 1000.0);
  return buf;
}

}  // namespace splitaudit
