#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "splitaudit/error.hpp"
#include "splitaudit/ingest.hpp"
#include "splitaudit/time_util.hpp"

using namespace splitaudit;
using testing_helpers::make_log;

namespace {

ParsedLog parse(const std::string& text, ColumnMapping m = {}, ParseOptions o = {}) {
  return read_log_text(text, "mem", m, SubsetRole::kRaw, o);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(ParseLog, CanonicalOrderAndOrdinals) {
  ColumnMapping m;
  m.timestamp_format = TimestampFormat::kEpochSeconds;
  auto log = parse("user_id,item_id,timestamp\nu1,i1,10\nu1,i2,5\nu2,i1,7\n", m).log;
  ASSERT_EQ(log.size(), 3u);
  const auto xs = log.interactions();
  EXPECT_EQ(log.user_name(xs[0].user), "u1");
  EXPECT_EQ(log.item_name(xs[0].item), "i2");
  EXPECT_EQ(xs[0].timestamp, 5000);
  EXPECT_EQ(xs[0].ordinal, 1u);
  EXPECT_EQ(log.item_name(xs[1].item), "i1");
  EXPECT_EQ(xs[1].timestamp, 10000);
  EXPECT_EQ(xs[1].ordinal, 0u);
  EXPECT_EQ(log.user_name(xs[2].user), "u2");
  EXPECT_EQ(xs[2].timestamp, 7000);
  EXPECT_EQ(xs[2].ordinal, 2u);
  ASSERT_EQ(log.user_count(), 2u);
  EXPECT_EQ(log.users()[0].size(), 2u);
  EXPECT_TRUE(validate_log(log).empty());
}

TEST(ParseLog, HeaderOnlyIsEmptyLog) {
  EXPECT_EQ(code_of([] { parse("user_id,item_id,timestamp\n"); }), ErrorCode::kEmptyLog);
  EXPECT_EQ(code_of([] { parse(""); }), ErrorCode::kEmptyLog);
  ParseOptions allow;
  allow.allow_empty = true;
  EXPECT_TRUE(parse("user_id,item_id,timestamp\n", {}, allow).log.empty());
}

TEST(ParseLog, MissingColumnNamesTheColumn) {
  try {
    parse("user,item_id,timestamp\nu,i,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingColumn);
    EXPECT_NE(std::string(e.what()).find("user_id"), std::string::npos);
  }
}

TEST(ParseLog, MalformedRowsCarryLineNumbers) {
  try {
    parse("user_id,item_id,timestamp\nu,i,1\nu,i\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRow);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  try {
    parse("user_id,item_id,timestamp\nu,i,1\nu,i,2\nu,i,abc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRow);
    EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse("user_id,item_id,timestamp\nu,i,-5\n"); }), ErrorCode::kMalformedRow);
}

TEST(ParseLog, SkipMalformedCountsRows) {
  ParseOptions o;
  o.skip_malformed = true;
  auto parsed = parse("user_id,item_id,timestamp\nu,i,1\nbad\nu,j,x\nu,k,3\n", {}, o);
  EXPECT_EQ(parsed.skipped_rows, 2u);
  ASSERT_EQ(parsed.log.size(), 2u);
  // Ordinals keep the source row index.
  EXPECT_EQ(parsed.log.interactions()[1].ordinal, 3u);
}

TEST(ParseLog, TabDelimiterQuotesAndExtraColumns) {
  auto log = parse("rating\tuser_id\titem_id\ttimestamp\n5\tu1\t\"a\tb\"\t3\n").log;
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log.item_name(log.interactions()[0].item), "a\tb");
  auto quoted = parse("user_id,item_id,timestamp\n\"x,y\",\"say \"\"hi\"\"\",4\r\n").log;
  EXPECT_EQ(quoted.user_name(quoted.interactions()[0].user), "x,y");
  EXPECT_EQ(quoted.item_name(quoted.interactions()[0].item), "say \"hi\"");
}

TEST(ParseLog, CustomColumnsAndFormats) {
  ColumnMapping m;
  m.user_column = "uid";
  m.item_column = "sku";
  m.timestamp_column = "when";
  m.timestamp_format = TimestampFormat::kIso8601;
  auto log = parse("uid,sku,when\nu,a,2020-01-01T00:00:01.5Z\nu,b,2020-01-01 01:00:00+01:00\nu,c,2020-01-02\n",
                   m)
                 .log;
  const auto xs = log.interactions();
  EXPECT_EQ(xs[0].timestamp, 1577836800000);  // b: 01:00+01:00 is midnight UTC
  EXPECT_EQ(log.item_name(xs[0].item), "b");
  EXPECT_EQ(xs[1].timestamp, 1577836801500);
  EXPECT_EQ(xs[2].timestamp, 1577923200000);

  ColumnMapping secs;
  secs.timestamp_format = TimestampFormat::kEpochSeconds;
  EXPECT_EQ(parse("user_id,item_id,timestamp\nu,i,1.2345\n", secs).log.interactions()[0].timestamp, 1234);

  ColumnMapping dup;
  dup.item_column = "user_id";
  EXPECT_EQ(code_of([&] { parse("user_id,item_id,timestamp\nu,i,1\n", dup); }), ErrorCode::kInvalidArgument);
}

TEST(ParseLog, Iso8601Rejections) {
  EXPECT_FALSE(parse_iso8601("2020-02-30"));
  EXPECT_FALSE(parse_iso8601("2020-01-01T25:00"));
  EXPECT_FALSE(parse_iso8601("2020-01-01T00:00:00 junk"));
  EXPECT_EQ(*parse_iso8601("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(format_iso8601(1577836801500), "2020-01-01T00:00:01.500Z");
}

TEST(ParseLog, DeterministicAndRoundTrips) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto rows = oracle::random_rows(rng, {8, 6, 60});
    const std::string csv = oracle::to_csv(rows);
    auto a = read_log_text(csv, "a", {}, SubsetRole::kRaw).log;
    auto b = read_log_text(csv, "b", {}, SubsetRole::kRaw).log;
    std::ostringstream sa, sb;
    write_log_csv(a, sa);
    write_log_csv(b, sb);
    ASSERT_EQ(sa.str(), sb.str());
    ASSERT_EQ(a, b);

    auto again = read_log_text(sa.str(), "c", ColumnMapping::canonical(), SubsetRole::kRaw).log;
    ASSERT_EQ(again, a);
    // Without the ordinal column, row order reproduces the same ordinals.
    auto plain = read_log_text(sa.str(), "d", ColumnMapping{}, SubsetRole::kRaw).log;
    ASSERT_EQ(plain, a);
  }
}

TEST(ParseLog, FileRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "splitaudit_ingest_test";
  std::filesystem::create_directories(dir);
  auto log = make_log(testing_helpers::rows({{"u2", "b", 5}, {"u1", "a1", 3}, {"u1", "c", 3}}));
  write_log_csv(log, dir / "log.csv");
  auto back = parse_log(dir / "log.csv", ColumnMapping::canonical(), SubsetRole::kRaw);
  EXPECT_EQ(back, log);
  EXPECT_EQ(code_of([&] { parse_log(dir / "missing.csv", {}, SubsetRole::kRaw); }), ErrorCode::kIo);
  std::filesystem::remove_all(dir);
}

TEST(CanonicalOrder, IsTotal) {
  std::mt19937_64 rng(11);
  auto log = make_log(oracle::random_rows(rng, {5, 4, 200}));
  const auto xs = log.interactions();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      ASSERT_NE(canonical_less(xs[i], xs[j]), canonical_less(xs[j], xs[i]));
    }
  }
}

TEST(ValidateLog, CanonicalLogIsClean) {
  auto log = make_log(testing_helpers::rows({{"u", "a", 1}, {"u", "b", 1}, {"v", "a", 0}}));
  EXPECT_TRUE(validate_log(log).empty());
}

TEST(ValidateLog, DuplicateOrdinal) {
  auto log = make_log(testing_helpers::rows({{"u", "a", 1}, {"u", "b", 2}, {"v", "a", 0}}));
  std::vector<Interaction> xs(log.interactions().begin(), log.interactions().end());
  xs[1].ordinal = xs[0].ordinal;
  xs[1].timestamp = xs[0].timestamp + 1;
  auto bad = InteractionLog::adopt_unchecked(xs, log.shared_vocabulary(), SubsetRole::kRaw);
  auto v = validate_log(bad);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kDuplicateOrdinal);
}

// Brute-force scan of the same invariants, independent of validate_log.
std::vector<std::pair<ViolationKind, std::uint64_t>> naive_violations(std::span<const Interaction> xs) {
  std::vector<std::pair<ViolationKind, std::uint64_t>> out;
  for (const auto& x : xs) {
    if (x.timestamp < 0) {
      out.emplace_back(ViolationKind::kNegativeTimestamp, x.ordinal);
      break;
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bool dup = false;
    for (std::size_t j = 0; j < i; ++j) dup = dup || xs[j].ordinal == xs[i].ordinal;
    if (dup) {
      out.emplace_back(ViolationKind::kDuplicateOrdinal, xs[i].ordinal);
      break;
    }
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const auto& a = xs[i - 1];
    const auto& b = xs[i];
    const bool ordered = std::tuple(a.user, a.timestamp, a.ordinal) < std::tuple(b.user, b.timestamp, b.ordinal);
    if (!ordered) {
      out.emplace_back(ViolationKind::kNotCanonical, b.ordinal);
      break;
    }
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i].user == xs[i - 1].user) continue;
    bool seen_before = false;
    for (std::size_t j = 0; j < i; ++j) seen_before = seen_before || xs[j].user == xs[i].user;
    if (seen_before) {
      out.emplace_back(ViolationKind::kFragmentedUser, xs[i].ordinal);
      break;
    }
  }
  return out;
}

TEST(ValidateLog, ShuffledLogMatchesNaiveScan) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto log = make_log(oracle::random_rows(rng, {6, 5, 100}));
    std::vector<Interaction> xs(log.interactions().begin(), log.interactions().end());
    std::shuffle(xs.begin(), xs.end(), rng);
    if (trial % 3 == 0) xs[xs.size() / 2].ordinal = xs[0].ordinal;
    auto bad = InteractionLog::adopt_unchecked(xs, log.shared_vocabulary(), SubsetRole::kRaw);
    std::vector<std::pair<ViolationKind, std::uint64_t>> got;
    for (const auto& v : validate_log(bad)) got.emplace_back(v.kind, v.ordinal);
    ASSERT_EQ(got, naive_violations(xs)) << "trial " << trial;
  }
}
