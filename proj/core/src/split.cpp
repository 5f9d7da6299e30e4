#include "splitaudit/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "splitaudit/error.hpp"

namespace splitaudit {

namespace {

enum Period : std::uint8_t { kTrainPeriod = 0, kValPeriod = 1, kTestPeriod = 2 };

struct EvalRows {
  std::vector<Interaction> input;
  std::vector<Interaction> target;
};

std::vector<bool> train_items(const std::vector<Interaction>& train, std::size_t n_items) {
  std::vector<bool> warm(n_items, false);
  for (const auto& x : train) warm[index_of(x.item)] = true;
  return warm;
}

// Per-user cold filtering. `rows` holds one user's input and target.
void append_user(EvalRows& out, std::vector<Interaction> input, std::vector<Interaction> target,
                 const std::vector<bool>& warm, const SplitSpec& spec) {
  if (spec.filter_cold_items) {
    std::erase_if(target, [&](const Interaction& x) { return !warm[index_of(x.item)]; });
    if (target.empty()) return;
  }
  if (spec.filter_cold_inputs) {
    std::erase_if(input, [&](const Interaction& x) { return !warm[index_of(x.item)]; });
  }
  out.input.insert(out.input.end(), input.begin(), input.end());
  out.target.insert(out.target.end(), target.begin(), target.end());
}

SplitBundle assemble(const InteractionLog& log, std::vector<Interaction> train, EvalRows val,
                     EvalRows test, const SplitSpec& spec, Provenance provenance) {
  SplitBundle b;
  b.train = derive_log(log, std::move(train), SubsetRole::kTrain);
  b.val_input = derive_log(log, std::move(val.input), SubsetRole::kValInput);
  b.val_target = derive_log(log, std::move(val.target), SubsetRole::kValTarget);
  b.test_input = derive_log(log, std::move(test.input), SubsetRole::kTestInput);
  b.test_target = derive_log(log, std::move(test.target), SubsetRole::kTestTarget);
  b.spec = spec;
  if (provenance.source_id.empty()) provenance.source_id = log_fingerprint(log);
  b.provenance = std::move(provenance);
  return b;
}

}  // namespace

std::string_view strategy_name(SplitStrategy s) {
  return s == SplitStrategy::kLeaveOneOut ? "leave_one_out" : "global_temporal";
}

std::string_view target_mode_name(TargetMode m) {
  return m == TargetMode::kLastItem ? "last_item" : "all_items";
}

std::string_view eval_side_name(EvalSide s) { return s == EvalSide::kTest ? "test" : "validation"; }

std::optional<EvalSide> eval_side_from_name(std::string_view name) {
  if (name == "test") return EvalSide::kTest;
  if (name == "validation" || name == "val") return EvalSide::kValidation;
  return std::nullopt;
}

void SplitSpec::validate() const {
  if (strategy == SplitStrategy::kGlobalTemporal) {
    if (!(q_val > 0.0 && q_val < q_test && q_test < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "global temporal split requires 0 < q_val < q_test < 1");
    }
  } else if (min_user_length_loo < 3) {
    throw Error(ErrorCode::kInvalidArgument, "min_user_length_loo must be >= 3");
  }
}

SplitSpec SplitSpec::leave_one_out() {
  SplitSpec s;
  s.strategy = SplitStrategy::kLeaveOneOut;
  s.target_mode = TargetMode::kLastItem;
  return s;
}

SplitSpec SplitSpec::global_temporal(double q_val, double q_test, TargetMode mode) {
  SplitSpec s;
  s.strategy = SplitStrategy::kGlobalTemporal;
  s.q_val = q_val;
  s.q_test = q_test;
  s.target_mode = mode;
  return s;
}

std::string log_fingerprint(const InteractionLog& log) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& x : log.interactions()) {
    const auto& u = log.user_name(x.user);
    const auto& it = log.item_name(x.item);
    mix(u.data(), u.size());
    mix("\x1f", 1);
    mix(it.data(), it.size());
    mix("\x1f", 1);
    mix(&x.timestamp, sizeof x.timestamp);
    mix(&x.ordinal, sizeof x.ordinal);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const InteractionLog& SplitBundle::subset(SubsetRole role) const {
  switch (role) {
    case SubsetRole::kTrain: return train;
    case SubsetRole::kValInput: return val_input;
    case SubsetRole::kValTarget: return val_target;
    case SubsetRole::kTestInput: return test_input;
    case SubsetRole::kTestTarget: return test_target;
    default: break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "bundle has no subset with role " + std::string(role_name(role)));
}

std::size_t quantile_cut(double q, std::size_t n) {
  const double x = q * static_cast<double>(n);
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

SplitBundle global_temporal_split(const InteractionLog& log, const SplitSpec& spec,
                                  Provenance provenance) {
  if (spec.strategy != SplitStrategy::kGlobalTemporal) {
    throw Error(ErrorCode::kInvalidArgument, "spec is not a global temporal split");
  }
  spec.validate();
  const auto xs = log.interactions();
  const std::size_t n = xs.size();
  if (n == 0) throw Error(ErrorCode::kEmptyLog, "cannot split an empty log");

  const std::size_t k_val = quantile_cut(spec.q_val, n);
  const std::size_t k_test = quantile_cut(spec.q_test, n);
  if (k_val == 0 || k_test <= k_val || k_test >= n) {
    throw Error(ErrorCode::kDegenerateSplit,
                "period sizes " + std::to_string(k_val) + "/" + std::to_string(k_test - k_val) + "/" +
                    std::to_string(n - std::min(n, k_test)) + " include an empty period");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return time_less(xs[a], xs[b]); });
  std::vector<std::uint8_t> period(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    period[order[rank]] = rank < k_val ? kTrainPeriod : (rank < k_test ? kValPeriod : kTestPeriod);
  }

  std::vector<Interaction> train;
  for (std::size_t i = 0; i < n; ++i) {
    if (period[i] == kTrainPeriod) train.push_back(xs[i]);
  }
  const auto warm = train_items(train, log.vocabulary().item_count());

  auto eval_rows = [&](std::uint8_t eval_period) {
    EvalRows rows;
    for (const auto& slice : log.users()) {
      // Within a user, canonical order is time order, so the period is non-decreasing.
      std::size_t first = slice.end;
      std::size_t last = slice.begin;
      for (std::size_t i = slice.begin; i < slice.end; ++i) {
        if (period[i] == eval_period) {
          first = std::min(first, i);
          last = i + 1;
        }
      }
      if (first == slice.end) continue;
      std::vector<Interaction> input, target;
      if (spec.target_mode == TargetMode::kAllItems) {
        input.assign(xs.begin() + slice.begin, xs.begin() + first);
        target.assign(xs.begin() + first, xs.begin() + last);
      } else {
        input.assign(xs.begin() + slice.begin, xs.begin() + last - 1);
        target.push_back(xs[last - 1]);
      }
      append_user(rows, std::move(input), std::move(target), warm, spec);
    }
    return rows;
  };

  EvalRows val = eval_rows(kValPeriod);
  EvalRows test = eval_rows(kTestPeriod);
  return assemble(log, std::move(train), std::move(val), std::move(test), spec, std::move(provenance));
}

SplitBundle leave_one_out_split(const InteractionLog& log, const SplitSpec& spec,
                                Provenance provenance) {
  if (spec.strategy != SplitStrategy::kLeaveOneOut) {
    throw Error(ErrorCode::kInvalidArgument, "spec is not a leave-one-out split");
  }
  spec.validate();
  const auto xs = log.interactions();

  std::vector<Interaction> train;
  std::size_t eligible = 0;
  for (const auto& slice : log.users()) {
    const std::size_t keep = slice.size() >= spec.min_user_length_loo ? slice.size() - 2 : slice.size();
    if (keep != slice.size()) ++eligible;
    train.insert(train.end(), xs.begin() + slice.begin, xs.begin() + slice.begin + keep);
  }
  if (eligible == 0) {
    throw Error(ErrorCode::kEmptyEvaluation,
                "no user has at least " + std::to_string(spec.min_user_length_loo) + " interactions");
  }
  const auto warm = train_items(train, log.vocabulary().item_count());

  EvalRows val, test;
  for (const auto& slice : log.users()) {
    if (slice.size() < spec.min_user_length_loo) continue;
    const std::size_t last = slice.end - 1;
    append_user(test, {xs.begin() + slice.begin, xs.begin() + last}, {xs[last]}, warm, spec);
    append_user(val, {xs.begin() + slice.begin, xs.begin() + last - 1}, {xs[last - 1]}, warm, spec);
  }
  return assemble(log, std::move(train), std::move(val), std::move(test), spec, std::move(provenance));
}

SplitBundle make_split(const InteractionLog& log, const SplitSpec& spec, Provenance provenance) {
  return spec.strategy == SplitStrategy::kLeaveOneOut
             ? leave_one_out_split(log, spec, std::move(provenance))
             : global_temporal_split(log, spec, std::move(provenance));
}

InteractionLog reconstruct_source(const SplitBundle& bundle) {
  std::vector<Interaction> all;
  for (const auto* part : {&bundle.train, &bundle.val_target, &bundle.test_target}) {
    all.insert(all.end(), part->interactions().begin(), part->interactions().end());
  }
  std::sort(all.begin(), all.end(), canonical_less);
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const InteractionLog& like = bundle.train.empty() ? bundle.test_target : bundle.train;
  return derive_log(like, std::move(all), SubsetRole::kPreprocessed);
}

RoleDescription describe_subset(const InteractionLog& log, SubsetRole role) {
  RoleDescription d;
  d.role = role;
  d.n_users = log.user_count();
  d.n_items = log.item_count();
  d.n_interactions = log.size();
  if (!log.empty()) {
    auto [lo, hi] = std::minmax_element(
        log.interactions().begin(), log.interactions().end(),
        [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
    d.start_ts = lo->timestamp;
    d.end_ts = hi->timestamp;
  }
  return d;
}

SplitDescription describe_split(const SplitBundle& bundle) {
  SplitDescription out;
  for (SubsetRole role : {SubsetRole::kTrain, SubsetRole::kValInput, SubsetRole::kValTarget,
                          SubsetRole::kTestInput, SubsetRole::kTestTarget}) {
    out.roles.push_back(describe_subset(bundle.subset(role), role));
  }
  auto without_input = [](const InteractionLog& input, const InteractionLog& target) {
    std::uint64_t n = 0;
    for (const auto& slice : target.users()) {
      if (!input.find_user(slice.user)) ++n;
    }
    return n;
  };
  out.val_users_without_input = without_input(bundle.val_input, bundle.val_target);
  out.test_users_without_input = without_input(bundle.test_input, bundle.test_target);
  return out;
}

}  // namespace splitaudit
