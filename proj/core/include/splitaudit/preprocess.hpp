#pragma once

#include <cstdint>
#include <optional>

#include "splitaudit/log.hpp"

namespace splitaudit {

struct PreprocessSpec {
  std::optional<std::uint32_t> n_core;
  bool drop_consecutive_repeats = false;
  std::optional<std::uint64_t> shuffle_collisions_seed;

  void validate() const;
  bool is_identity() const {
    return !n_core && !drop_consecutive_repeats && !shuffle_collisions_seed;
  }
  bool operator==(const PreprocessSpec&) const = default;
};

enum class PruneOrder { kUsersFirst, kItemsFirst };

// Iteratively drops users and items with fewer than `n` interactions until
// nothing changes. Counts interactions, not distinct partners. The fixed point
// does not depend on `order`.
InteractionLog n_core_filter(const InteractionLog& log, std::uint32_t n,
                             PruneOrder order = PruneOrder::kUsersFirst);

// Keeps the first interaction of every maximal run of one item within a user.
InteractionLog drop_consecutive_repeats(const InteractionLog& log);

// Uniformly permutes each within-user group of equal timestamps by reassigning
// the group's ordinals. The generator is std::mt19937_64 seeded with `seed`;
// groups are visited in canonical order and shuffled with Fisher-Yates using
// rejection-sampled bounded draws, so output is identical on every platform.
InteractionLog shuffle_collision_order(const InteractionLog& log, std::uint64_t seed);

// Applies the requested steps as: repeats removal, n-core, collision shuffle.
// The result carries the `preprocessed` role.
InteractionLog preprocess(const InteractionLog& log, const PreprocessSpec& spec);

// Uniform integer in [0, bound) from one 64-bit engine.
template <typename Engine>
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace splitaudit
