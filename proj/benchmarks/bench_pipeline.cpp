#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <sstream>
#include <string>

#include "splitaudit/diagnostics.hpp"
#include "splitaudit/ingest.hpp"
#include "splitaudit/preprocess.hpp"
#include "splitaudit/report.hpp"
#include "splitaudit/serialize.hpp"
#include "splitaudit/split.hpp"
#include "splitaudit/stats.hpp"

namespace {

using namespace splitaudit;

// Rating-like log: ~165 interactions per user, skewed item popularity, seconds
// resolution with frequent same-second bursts.
std::string synthetic_csv(std::int64_t rows) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(rows));
  const std::int64_t users = std::max<std::int64_t>(1, rows / 165);
  const int items = 4000;
  std::ostringstream out;
  out << "user_id,item_id,timestamp\n";
  std::int64_t written = 0;
  for (std::int64_t u = 0; written < rows; u = (u + 1) % users) {
    std::int64_t ts = 956'700'000 + static_cast<std::int64_t>(rng() % 90'000'000);
    const std::int64_t len = std::min<std::int64_t>(rows - written, 1 + static_cast<std::int64_t>(rng() % 330));
    for (std::int64_t k = 0; k < len; ++k) {
      ts += (rng() % 2 == 0) ? 0 : static_cast<std::int64_t>(rng() % 86'400);
      const double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const int item = static_cast<int>(items * x * x);
      out << 'u' << u << ",m" << item << ',' << ts << '\n';
    }
    written += len;
  }
  return out.str();
}

const InteractionLog& cached_log(std::int64_t rows) {
  static std::map<std::int64_t, InteractionLog> cache;
  auto it = cache.find(rows);
  if (it == cache.end()) {
    ColumnMapping mapping;
    mapping.timestamp_format = TimestampFormat::kEpochSeconds;
    it = cache.emplace(rows, read_log_text(synthetic_csv(rows), "bench", mapping, SubsetRole::kRaw).log).first;
  }
  return it->second;
}

const SplitBundle& cached_gts(std::int64_t rows) {
  static std::map<std::int64_t, SplitBundle> cache;
  auto it = cache.find(rows);
  if (it == cache.end()) {
    it = cache.emplace(rows, make_split(cached_log(rows), SplitSpec::global_temporal(0.8, 0.9, TargetMode::kAllItems)))
             .first;
  }
  return it->second;
}

void BM_Parse(benchmark::State& state) {
  const std::string csv = synthetic_csv(state.range(0));
  ColumnMapping mapping;
  mapping.timestamp_format = TimestampFormat::kEpochSeconds;
  for (auto _ : state) {
    benchmark::DoNotOptimize(read_log_text(csv, "bench", mapping, SubsetRole::kRaw));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(csv.size()));
}
BENCHMARK(BM_Parse)->Arg(10'000)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_CoreStats(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(core_stats(log));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CoreStats)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_TemporalStats(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(temporal_stats(log));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TemporalStats)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_RepeatStats(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(repeat_stats(log));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RepeatStats)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_NCore(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(n_core_filter(log, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NCore)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_ShuffleCollisions(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(shuffle_collision_order(log, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ShuffleCollisions)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_GlobalTemporalSplit(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  const auto spec = SplitSpec::global_temporal(0.8, 0.9, TargetMode::kAllItems);
  for (auto _ : state) benchmark::DoNotOptimize(make_split(log, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GlobalTemporalSplit)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_LeaveOneOutSplit(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  const auto spec = SplitSpec::leave_one_out();
  for (auto _ : state) benchmark::DoNotOptimize(make_split(log, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LeaveOneOutSplit)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_LeakageAndColdStart(benchmark::State& state) {
  const auto& bundle = cached_gts(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(leakage(bundle, EvalSide::kTest));
    benchmark::DoNotOptimize(cold_start(bundle, EvalSide::kTest));
  }
}
BENCHMARK(BM_LeakageAndColdStart)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_DistributionShift(benchmark::State& state) {
  const auto& bundle = cached_gts(state.range(0));
  const auto& log = cached_log(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(distribution_shift(bundle, log, EvalSide::kTest));
}
BENCHMARK(BM_DistributionShift)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_KsStatistic(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& x : a) x = static_cast<double>(rng() % 100'000);
  for (auto& x : b) x = static_cast<double>(rng() % 120'000);
  for (auto _ : state) benchmark::DoNotOptimize(ks_statistic(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_KsStatistic)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_FullAudit(benchmark::State& state) {
  const auto& log = cached_log(state.range(0));
  const auto& bundle = cached_gts(state.range(0));
  for (auto _ : state) {
    const auto details = run_audit(log, &bundle);
    benchmark::DoNotOptimize(summarize(details, ThresholdConfig::defaults(), {}));
  }
}
BENCHMARK(BM_FullAudit)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_AuditToJson(benchmark::State& state) {
  const auto details = run_audit(cached_log(state.range(0)), &cached_gts(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(to_json(details));
}
BENCHMARK(BM_AuditToJson)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
