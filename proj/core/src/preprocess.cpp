#include "splitaudit/preprocess.hpp"

#include <random>
#include <utility>
#include <vector>

#include "splitaudit/error.hpp"

namespace splitaudit {

void PreprocessSpec::validate() const {
  if (n_core && *n_core < 1) throw Error(ErrorCode::kInvalidArgument, "n_core must be >= 1");
}

InteractionLog n_core_filter(const InteractionLog& log, std::uint32_t n, PruneOrder order) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n_core must be >= 1");
  const auto xs = log.interactions();
  if (n == 1 || xs.empty()) return log;

  const auto& vocab = log.vocabulary();
  std::vector<bool> alive(xs.size(), true);
  std::vector<std::size_t> user_count(vocab.user_count()), item_count(vocab.item_count());

  auto recount = [&] {
    std::fill(user_count.begin(), user_count.end(), 0);
    std::fill(item_count.begin(), item_count.end(), 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!alive[i]) continue;
      ++user_count[index_of(xs[i].user)];
      ++item_count[index_of(xs[i].item)];
    }
  };
  auto prune_users = [&] {
    bool changed = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (alive[i] && user_count[index_of(xs[i].user)] < n) {
        alive[i] = false;
        changed = true;
      }
    }
    return changed;
  };
  auto prune_items = [&] {
    bool changed = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (alive[i] && item_count[index_of(xs[i].item)] < n) {
        alive[i] = false;
        changed = true;
      }
    }
    return changed;
  };

  for (bool changed = true; changed;) {
    recount();
    changed = order == PruneOrder::kUsersFirst ? prune_users() : prune_items();
    recount();
    changed = (order == PruneOrder::kUsersFirst ? prune_items() : prune_users()) || changed;
  }

  std::vector<Interaction> kept;
  kept.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (alive[i]) kept.push_back(xs[i]);
  }
  return derive_log(log, std::move(kept), log.role());
}

InteractionLog drop_consecutive_repeats(const InteractionLog& log) {
  std::vector<Interaction> kept;
  kept.reserve(log.size());
  for (const auto& slice : log.users()) {
    const auto seq = log.sequence(slice);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i == 0 || seq[i].item != seq[i - 1].item) kept.push_back(seq[i]);
    }
  }
  return derive_log(log, std::move(kept), log.role());
}

InteractionLog shuffle_collision_order(const InteractionLog& log, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<Interaction> out(log.interactions().begin(), log.interactions().end());
  std::vector<Interaction> group;
  for (const auto& slice : log.users()) {
    std::size_t i = slice.begin;
    while (i < slice.end) {
      std::size_t j = i + 1;
      while (j < slice.end && out[j].timestamp == out[i].timestamp) ++j;
      if (j - i >= 2) {
        group.assign(out.begin() + i, out.begin() + j);
        for (std::size_t k = group.size() - 1; k > 0; --k) {
          std::swap(group[k], group[uniform_below(engine, k + 1)]);
        }
        // Ordinals inside [i, j) are ascending; keep them in place and move the items.
        for (std::size_t k = 0; k < group.size(); ++k) out[i + k].item = group[k].item;
      }
      i = j;
    }
  }
  return InteractionLog::build(std::move(out), log.shared_vocabulary(), log.role());
}

InteractionLog preprocess(const InteractionLog& log, const PreprocessSpec& spec) {
  spec.validate();
  InteractionLog out = log;
  if (spec.drop_consecutive_repeats) out = drop_consecutive_repeats(out);
  if (spec.n_core) out = n_core_filter(out, *spec.n_core);
  if (spec.shuffle_collisions_seed) out = shuffle_collision_order(out, *spec.shuffle_collisions_seed);
  return out.with_role(SubsetRole::kPreprocessed);
}

}  // namespace splitaudit
