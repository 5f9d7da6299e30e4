#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitaudit/log.hpp"
#include "splitaudit/preprocess.hpp"

namespace splitaudit {

enum class SplitStrategy { kLeaveOneOut, kGlobalTemporal };
enum class TargetMode { kLastItem, kAllItems };
enum class EvalSide { kValidation, kTest };

std::string_view strategy_name(SplitStrategy s);
std::string_view target_mode_name(TargetMode m);
std::string_view eval_side_name(EvalSide s);
std::optional<EvalSide> eval_side_from_name(std::string_view name);

struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::kGlobalTemporal;
  // Interaction-count quantiles of the global time order; global temporal only.
  double q_val = 0.8;
  double q_test = 0.9;
  // Leave-one-out always uses kLastItem.
  TargetMode target_mode = TargetMode::kAllItems;
  bool filter_cold_items = true;
  // Also removes cold items from the input subsets of the kept users.
  bool filter_cold_inputs = false;
  std::uint32_t min_user_length_loo = 3;

  void validate() const;

  static SplitSpec leave_one_out();
  static SplitSpec global_temporal(double q_val, double q_test, TargetMode mode);

  bool operator==(const SplitSpec&) const = default;
};

struct Provenance {
  std::string source_name;
  // Content fingerprint of the split's input log (see log_fingerprint).
  std::string source_id;
  PreprocessSpec preprocessing;

  bool operator==(const Provenance&) const = default;
};

// FNV-1a 64 over the canonical content, as 16 hex digits.
std::string log_fingerprint(const InteractionLog& log);

struct SplitBundle {
  InteractionLog train;
  InteractionLog val_input;
  InteractionLog val_target;
  InteractionLog test_input;
  InteractionLog test_target;
  SplitSpec spec;
  Provenance provenance;

  const InteractionLog& input(EvalSide side) const {
    return side == EvalSide::kTest ? test_input : val_input;
  }
  const InteractionLog& target(EvalSide side) const {
    return side == EvalSide::kTest ? test_target : val_target;
  }
  // Throws kInvalidArgument for raw/preprocessed.
  const InteractionLog& subset(SubsetRole role) const;
};

// Rounds q*n up, treating products within 1e-9 of an integer as that integer.
std::size_t quantile_cut(double q, std::size_t n);

// Train/validation/test periods are the index ranges [0, k_val), [k_val, k_test)
// and [k_test, N) of the (timestamp, ordinal) order, k = quantile_cut(q, N).
// All-items targets take every period interaction of a user and the input is the
// user's history before the period; last-item targets take the user's last period
// interaction and the input is all of that user's history before it.
SplitBundle global_temporal_split(const InteractionLog& log, const SplitSpec& spec,
                                  Provenance provenance = {});

SplitBundle leave_one_out_split(const InteractionLog& log, const SplitSpec& spec,
                                Provenance provenance = {});

// Dispatches on spec.strategy.
SplitBundle make_split(const InteractionLog& log, const SplitSpec& spec, Provenance provenance = {});

// Best-effort source log for a bundle loaded without its origin: train plus
// both target subsets, each interaction once, with the preprocessed role.
InteractionLog reconstruct_source(const SplitBundle& bundle);

struct RoleDescription {
  SubsetRole role = SubsetRole::kTrain;
  std::uint64_t n_users = 0;
  std::uint64_t n_items = 0;
  std::uint64_t n_interactions = 0;
  std::optional<Timestamp> start_ts;
  std::optional<Timestamp> end_ts;

  bool operator==(const RoleDescription&) const = default;
};

struct SplitDescription {
  std::vector<RoleDescription> roles;  // train, val_input, val_target, test_input, test_target
  // Evaluation users whose input is empty.
  std::uint64_t val_users_without_input = 0;
  std::uint64_t test_users_without_input = 0;

  bool operator==(const SplitDescription&) const = default;
};

RoleDescription describe_subset(const InteractionLog& log, SubsetRole role);
SplitDescription describe_split(const SplitBundle& bundle);

}  // namespace splitaudit
