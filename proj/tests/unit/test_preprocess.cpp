#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "helpers.hpp"
#include "splitaudit/error.hpp"
#include "splitaudit/preprocess.hpp"

using namespace splitaudit;
using testing_helpers::items_of;
using testing_helpers::make_log;
using testing_helpers::rows_of;
using testing_helpers::sequence;

namespace {

using Triple = std::tuple<std::string, std::string, std::int64_t>;

std::multiset<Triple> multiset_of(const InteractionLog& log) {
  std::multiset<Triple> out;
  for (const auto& r : rows_of(log)) out.emplace(r.user, r.item, r.ts);
  return out;
}

bool is_submultiset(const std::multiset<Triple>& small, const std::multiset<Triple>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

TEST(NCore, FixedPointAndTrivialN) {
  auto log = make_log(sequence("u", {"a", "a", "a"}));
  EXPECT_EQ(n_core_filter(log, 3), log);
  EXPECT_EQ(n_core_filter(log, 1), log);
  EXPECT_TRUE(n_core_filter(log, 4).empty());
  // Interaction counts, not distinct partners.
  auto one_item = make_log(sequence("u", {"a", "a", "a", "a", "a"}));
  EXPECT_EQ(n_core_filter(one_item, 5).size(), 5u);
}

TEST(NCore, CascadesToFixedPoint) {
  // Dropping v (2 rows) makes item b fall below 2, which then drops w's b row.
  auto log = make_log(testing_helpers::rows(
      {{"u", "a", 1}, {"u", "a", 2}, {"v", "c", 1}, {"w", "b", 1}, {"w", "a", 2}, {"w", "a", 3}}));
  auto out = n_core_filter(log, 2);
  EXPECT_EQ(testing_helpers::triples(out), (std::vector<std::string>{"u:a:1", "u:a:2", "w:a:2", "w:a:3"}));
}

TEST(NCore, MatchesOracleAndOrderIndependent) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    auto rows = oracle::random_rows(rng, {15, 12, 200});
    auto log = make_log(rows);
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(trial % 5);
    auto users_first = n_core_filter(log, n, PruneOrder::kUsersFirst);
    auto items_first = n_core_filter(log, n, PruneOrder::kItemsFirst);
    ASSERT_EQ(users_first, items_first) << "trial " << trial;
    ASSERT_EQ(rows_of(users_first), oracle::canonical(oracle::n_core(rows, n))) << "trial " << trial;
    ASSERT_EQ(n_core_filter(users_first, n), users_first);
    ASSERT_TRUE(validate_log(users_first).empty());
  }
}

TEST(DropConsecutive, Examples) {
  auto log = make_log(sequence("u", {"a", "a", "b", "a"}));
  EXPECT_EQ(items_of(drop_consecutive_repeats(log)), (std::vector<std::string>{"a", "b", "a"}));
  auto plain = make_log(sequence("u", {"a", "b", "c"}));
  EXPECT_EQ(drop_consecutive_repeats(plain), plain);
}

TEST(DropConsecutive, MatchesOracleAndIdempotent) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    auto rows = oracle::random_rows(rng, {10, 3, 150});
    auto log = make_log(rows);
    auto once = drop_consecutive_repeats(log);
    ASSERT_EQ(rows_of(once), oracle::dedup(rows));
    ASSERT_EQ(drop_consecutive_repeats(once), once);
    ASSERT_TRUE(is_submultiset(multiset_of(once), multiset_of(log)));
    ASSERT_TRUE(validate_log(once).empty());
  }
}

TEST(ShuffleCollisions, NoCollisionsIsIdentity) {
  auto log = make_log(sequence("u", {"a", "b", "c", "d"}));
  EXPECT_EQ(shuffle_collision_order(log, 42), log);
}

TEST(ShuffleCollisions, DeterministicAndPreservesGroups) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    auto log = make_log(oracle::random_rows(rng, {6, 8, 120}));
    const std::uint64_t seed = rng();
    auto a = shuffle_collision_order(log, seed);
    auto b = shuffle_collision_order(log, seed);
    ASSERT_EQ(a, b);
    ASSERT_EQ(multiset_of(a), multiset_of(log));
    ASSERT_TRUE(validate_log(a).empty());
    // Per (user, timestamp): the item multiset and the ordinal set are unchanged.
    using Key = std::pair<std::string, std::int64_t>;
    std::map<Key, std::pair<std::multiset<std::string>, std::set<std::uint64_t>>> before, after;
    for (const auto& r : rows_of(log)) {
      before[{r.user, r.ts}].first.insert(r.item);
      before[{r.user, r.ts}].second.insert(r.ord);
    }
    for (const auto& r : rows_of(a)) {
      after[{r.user, r.ts}].first.insert(r.item);
      after[{r.user, r.ts}].second.insert(r.ord);
    }
    ASSERT_EQ(before, after);
  }
}

TEST(ShuffleCollisions, GroupOfThreeIsRoughlyUniform) {
  auto log = make_log(testing_helpers::rows({{"u", "a", 5}, {"u", "b", 5}, {"u", "c", 5}, {"u", "d", 9}}));
  std::map<std::vector<std::string>, int> counts;
  const int trials = 6000;
  for (int seed = 0; seed < trials; ++seed) {
    auto out = shuffle_collision_order(log, static_cast<std::uint64_t>(seed));
    auto items = items_of(out);
    ASSERT_EQ(items.back(), "d");
    ++counts[items];
  }
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [perm, c] : counts) {
    // Expected 1000 each; 5 sigma is about 144.
    EXPECT_NEAR(c, trials / 6, 150);
  }
}

TEST(Preprocess, OrderAndRole) {
  PreprocessSpec spec;
  spec.drop_consecutive_repeats = true;
  spec.n_core = 3;
  // Dedup runs first and leaves a,b,c, so 3-core then empties the log. The
  // reverse order would have kept a single a.
  auto log = make_log(sequence("u", {"a", "a", "a", "b", "c"}));
  auto out = preprocess(log, spec);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(out.role(), SubsetRole::kPreprocessed);

  PreprocessSpec identity;
  EXPECT_TRUE(identity.is_identity());
  auto same = preprocess(log, identity);
  EXPECT_EQ(same, log.with_role(SubsetRole::kPreprocessed));

  PreprocessSpec bad;
  bad.n_core = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(UniformBelow, StaysInRange) {
  std::mt19937_64 rng(9);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 1}) {
    for (int i = 0; i < 200; ++i) ASSERT_LT(uniform_below(rng, bound), bound);
  }
}
