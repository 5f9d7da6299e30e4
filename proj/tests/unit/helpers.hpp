#pragma once

#include <random>
#include <string>
#include <vector>

#include "oracle/naive.hpp"
#include "splitaudit/ingest.hpp"
#include "splitaudit/log.hpp"

namespace testing_helpers {

using oracle::Row;

// Rows get ordinals equal to their position, like a freshly read file.
inline splitaudit::InteractionLog make_log(const std::vector<Row>& rows,
                                           splitaudit::SubsetRole role = splitaudit::SubsetRole::kRaw) {
  return splitaudit::read_log_text(oracle::to_csv(rows), "test", splitaudit::ColumnMapping{}, role).log;
}

inline std::vector<Row> rows(std::initializer_list<std::tuple<const char*, const char*, std::int64_t>> xs) {
  std::vector<Row> out;
  std::uint64_t i = 0;
  for (const auto& [u, it, ts] : xs) out.push_back({u, it, ts, i++});
  return out;
}

inline std::vector<Row> rows_of(const splitaudit::InteractionLog& log) {
  std::vector<Row> out;
  for (const auto& x : log.interactions()) {
    out.push_back({log.user_name(x.user), log.item_name(x.item), x.timestamp, x.ordinal});
  }
  return out;
}

// "user:item:ts" triples in log order, for readable assertions.
inline std::vector<std::string> triples(const splitaudit::InteractionLog& log) {
  std::vector<std::string> out;
  for (const auto& x : log.interactions()) {
    out.push_back(log.user_name(x.user) + ":" + log.item_name(x.item) + ":" + std::to_string(x.timestamp));
  }
  return out;
}

inline std::vector<std::string> items_of(const splitaudit::InteractionLog& log) {
  std::vector<std::string> out;
  for (const auto& x : log.interactions()) out.push_back(log.item_name(x.item));
  return out;
}

// Single user with strictly increasing timestamps 1..n and the given items.
inline std::vector<Row> sequence(const std::string& user, const std::vector<std::string>& items) {
  std::vector<Row> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out.push_back({user, items[i], static_cast<std::int64_t>(i + 1), i});
  }
  return out;
}

}  // namespace testing_helpers
