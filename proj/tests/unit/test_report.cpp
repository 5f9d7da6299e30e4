#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "splitaudit/report.hpp"
#include "splitaudit/serialize.hpp"
#include "splitaudit/version.hpp"
#include "support/generators.hpp"

using namespace splitaudit;
using testing_helpers::make_log;
using testing_helpers::sequence;

namespace {

AuditDetails details_with(double leaked_pct) {
  AuditDetails d;
  LeakageReport l;
  l.n_targets = 100;
  l.leaked_target_pct = leaked_pct;
  d.leakage.push_back(l);
  return d;
}

const Card& card(const SummaryReport& s, std::string_view name) {
  for (const auto& c : s.cards) {
    if (c.metric == name) return c;
  }
  throw std::runtime_error("no card " + std::string(name));
}

// Independent restatement of the status rule.
CardStatus naive_status(bool high_is_bad, double v, double warn, double alert) {
  if (high_is_bad) return v >= alert ? CardStatus::kAlert : (v >= warn ? CardStatus::kWarn : CardStatus::kOk);
  return v < alert ? CardStatus::kAlert : (v < warn ? CardStatus::kWarn : CardStatus::kOk);
}

}  // namespace

TEST(Thresholds, DefaultsAreValidAndDocumented) {
  auto t = ThresholdConfig::defaults();
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t[Metric::kCollisionRatePct], (Threshold{1, 20}));
  EXPECT_EQ(t[Metric::kConsecutiveRepeatsPct], (Threshold{1, 10}));
  EXPECT_EQ(t[Metric::kLeakedTargetPct], (Threshold{0.1, 5}));
  EXPECT_EQ(t[Metric::kColdItemsPct], (Threshold{5, 25}));
  EXPECT_EQ(t[Metric::kTimegapKs], (Threshold{0.1, 0.3}));
  EXPECT_EQ(t[Metric::kPositionKs], (Threshold{0.1, 0.3}));
  EXPECT_EQ(t[Metric::kMinEvalUsers], (Threshold{1000, 100}));
  t[Metric::kLeakedTargetPct] = {10, 1};
  EXPECT_THROW(t.validate(), Error);
  t = ThresholdConfig::defaults();
  t[Metric::kMinEvalUsers] = {100, 1000};
  EXPECT_THROW(t.validate(), Error);
}

TEST(Summarize, LeakageAlert) {
  auto t = ThresholdConfig::defaults();
  t[Metric::kLeakedTargetPct] = {1, 10};
  auto s = summarize(details_with(89), t);
  EXPECT_EQ(card(s, "leaked_target_pct").status, CardStatus::kAlert);
  EXPECT_EQ(card(s, "leaked_target_pct").link, "leakage");
  EXPECT_EQ(worst_status(s), CardStatus::kAlert);
}

TEST(Summarize, ZeroValuesAreOkAndMissingAreNotApplicable) {
  AuditDetails d;
  d.temporal = TemporalStatsReport{};
  d.repeats = RepeatReport{};
  d.leakage.push_back(LeakageReport{});
  d.leakage.back().n_targets = 5000;
  ColdStartReport c;
  c.n_targets = 5000;
  d.cold_start.push_back(c);
  ShiftReport sh;
  sh.timegap_ks = 0.0;
  d.shift.push_back(sh);
  SplitDescription desc;
  for (int i = 0; i < 5; ++i) desc.roles.push_back(RoleDescription{SubsetRole::kTrain, 5000, 10, 5000, {}, {}});
  d.split = desc;
  auto s = summarize(d, ThresholdConfig::defaults());
  ASSERT_EQ(s.cards.size(), kMetricCount);
  for (const auto& c : s.cards) EXPECT_EQ(c.status, CardStatus::kOk) << c.metric;

  auto empty = summarize(AuditDetails{}, ThresholdConfig::defaults());
  for (const auto& c : empty.cards) {
    EXPECT_EQ(c.status, CardStatus::kNotApplicable) << c.metric;
    EXPECT_FALSE(c.value.has_value());
  }
  EXPECT_EQ(worst_status(empty), CardStatus::kOk);
  EXPECT_EQ(empty.toolkit_version, kToolkitVersion);
  EXPECT_FALSE(empty.generated_at.has_value());
}

TEST(Summarize, MinEvalTakesSmallerTargetSubset) {
  AuditDetails d;
  SplitDescription desc;
  for (int i = 0; i < 5; ++i) desc.roles.push_back(RoleDescription{SubsetRole::kTrain, 5000, 10, 5000, {}, {}});
  desc.roles[2].n_users = 50;
  d.split = desc;
  auto s = summarize(d, ThresholdConfig::defaults());
  EXPECT_EQ(card(s, "min_eval_users").value, 50.0);
  EXPECT_EQ(card(s, "min_eval_users").status, CardStatus::kAlert);
  EXPECT_EQ(card(s, "min_eval_interactions").status, CardStatus::kOk);
}

TEST(Summarize, MatchesNaiveComparatorAndIsMonotone) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    auto t = generators::random_thresholds(rng);
    for (const auto& info : metric_table()) {
      const double v = generators::random_real(rng);
      const auto& th = t[info.metric];
      const bool high = info.direction == Direction::kHighIsBad;
      ASSERT_EQ(evaluate_status(info.metric, v, t), naive_status(high, v, th.warn, th.alert));
      // Boundaries themselves.
      ASSERT_EQ(evaluate_status(info.metric, th.warn, t), naive_status(high, th.warn, th.warn, th.alert));
      ASSERT_EQ(evaluate_status(info.metric, th.alert, t), naive_status(high, th.alert, th.warn, th.alert));
      if (high) {
        const double bigger = v + std::fabs(generators::random_real(rng));
        ASSERT_GE(static_cast<int>(evaluate_status(info.metric, bigger, t)),
                  static_cast<int>(evaluate_status(info.metric, v, t)));
      }
    }
  }
}

TEST(Json, RoundTripGeneratedReports) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    for (const auto& doc : generators::random_documents(rng)) {
      const std::string bytes = to_json(doc);
      Document back = from_json(bytes);
      ASSERT_EQ(back.index(), doc.index());
      ASSERT_TRUE(back == doc) << document_kind(doc) << "\n" << bytes;
      ASSERT_EQ(to_json(back), bytes);
    }
  }
}

TEST(Json, EnvelopeAndVersion) {
  const std::string bytes = to_json(ThresholdConfig::defaults());
  EXPECT_NE(bytes.find("\"schema_version\": 1"), std::string::npos);
  EXPECT_NE(bytes.find("\"kind\": \"thresholds\""), std::string::npos);
  std::string tampered = bytes;
  tampered.replace(tampered.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  try {
    from_json(tampered);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaVersionMismatch);
  }
  try {
    from_json_as<SplitSpec>(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedDocument);
  }
  for (const char* bad : {"", "{", "[]", "{\"schema_version\":1}", "{\"schema_version\":\"1\",\"kind\":\"thresholds\"}",
                          "{\"schema_version\":1,\"kind\":\"nope\",\"report\":{}}",
                          "{\"schema_version\":1,\"kind\":\"core_stats\",\"report\":{\"n_users\":-1}}"}) {
    try {
      from_json(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedDocument) << bad;
    }
  }
  std::string deep(100000, '[');
  EXPECT_THROW(from_json(deep), Error);
}

TEST(Json, ThresholdsAcceptPartialOverrides) {
  auto t = from_json_as<ThresholdConfig>(
      R"({"schema_version":1,"kind":"thresholds","report":{"leaked_target_pct":{"warn":2,"alert":3}}})");
  EXPECT_EQ(t[Metric::kLeakedTargetPct], (Threshold{2, 3}));
  EXPECT_EQ(t[Metric::kCollisionRatePct], ThresholdConfig::defaults()[Metric::kCollisionRatePct]);
  EXPECT_THROW(from_json_as<ThresholdConfig>(
                   R"({"schema_version":1,"kind":"thresholds","report":{"bogus":{"warn":2,"alert":3}}})"),
               Error);
}

TEST(Json, InvalidUtf8IsReplacedNotFatal) {
  Provenance p;
  p.source_name = "caf\xe9";
  const std::string bytes = to_json(p);
  auto back = from_json_as<Provenance>(bytes);
  EXPECT_EQ(back.source_name, "caf\xef\xbf\xbd");
}

TEST(Markdown, DeterministicAndSummaryOnlyWhenEmpty) {
  auto log = make_log(sequence("u", {"a", "b", "a", "b", "c", "a"}));
  AuditDetails d;
  d.core = core_stats(log);
  d.temporal = temporal_stats(log);
  auto s = summarize(d, ThresholdConfig::defaults(), {"fixture", {}, {}, {}});
  const auto md = render_markdown(s, d);
  EXPECT_EQ(md, render_markdown(s, d));
  EXPECT_NE(md.find("collision_rate_pct"), std::string::npos);
  EXPECT_NE(md.find("fixture"), std::string::npos);

  auto empty = summarize(AuditDetails{}, ThresholdConfig::defaults(), {"fixture", {}, {}, {}});
  const auto summary_only = render_markdown(empty, AuditDetails{});
  EXPECT_NE(summary_only.find("| Metric"), std::string::npos);
  EXPECT_EQ(summary_only.find("Core and temporal statistics"), std::string::npos);
}

TEST(Markdown, CollisionCardPrintsFourDecimals) {
  // 52.8935 printed as-is: 529 colliding interactions out of 1000.
  TemporalStatsReport t;
  t.collision_rate_pct = 52.8935;
  AuditDetails d;
  d.temporal = t;
  auto s = summarize(d, ThresholdConfig::defaults());
  EXPECT_NE(render_markdown(s, d).find("52.8935"), std::string::npos);
  EXPECT_EQ(format_value(-0.0), "0.0000");
  EXPECT_EQ(format_value(2.0 / 3.0), "0.6667");
}

TEST(ComparisonRendering, AlignedColumns) {
  std::mt19937_64 rng(5);
  auto log = make_log(oracle::random_rows(rng, {20, 8, 300}));
  auto loo = make_split(log, SplitSpec::leave_one_out());
  auto gts = make_split(log, SplitSpec::global_temporal(0.8, 0.9, TargetMode::kAllItems));
  std::vector<NamedBundle> named{{"loo", &loo}, {"gts", &gts}};
  auto m = compare_splits(named, &log);
  const auto text = render_comparison_text(m);
  std::istringstream lines(text);
  std::string line;
  std::size_t width = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (width == 0) width = line.size();
    EXPECT_EQ(line.size(), width) << line;
  }
  const auto md = render_comparison_markdown(m);
  EXPECT_NE(md.find("| loo"), std::string::npos);
}
