#include "splitaudit/log.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "splitaudit/error.hpp"

namespace splitaudit {

namespace {

constexpr std::array<std::string_view, 7> kRoleNames = {
    "raw", "preprocessed", "train", "val_input", "val_target", "test_input", "test_target"};

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

}  // namespace

std::string_view role_name(SubsetRole role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<SubsetRole> role_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<SubsetRole>(i);
  }
  return std::nullopt;
}

Vocabulary::Vocabulary(std::vector<std::string> users, std::vector<std::string> items)
    : users_(sorted_unique(std::move(users))), items_(sorted_unique(std::move(items))) {
  if (users_.size() > UINT32_MAX || items_.size() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary exceeds 2^32 entries");
  }
  user_lookup_.reserve(users_.size());
  for (std::uint32_t i = 0; i < users_.size(); ++i) user_lookup_.emplace(users_[i], i);
  item_lookup_.reserve(items_.size());
  for (std::uint32_t i = 0; i < items_.size(); ++i) item_lookup_.emplace(items_[i], i);
}

std::optional<UserHandle> Vocabulary::find_user(std::string_view name) const {
  auto it = user_lookup_.find(name);
  if (it == user_lookup_.end()) return std::nullopt;
  return UserHandle{it->second};
}

std::optional<ItemHandle> Vocabulary::find_item(std::string_view name) const {
  auto it = item_lookup_.find(name);
  if (it == item_lookup_.end()) return std::nullopt;
  return ItemHandle{it->second};
}

InteractionLog::InteractionLog(std::vector<Interaction> interactions,
                               std::shared_ptr<const Vocabulary> vocabulary, SubsetRole role)
    : interactions_(std::move(interactions)), vocabulary_(std::move(vocabulary)), role_(role) {
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= interactions_.size(); ++i) {
    if (i == interactions_.size() || interactions_[i].user != interactions_[begin].user) {
      users_.push_back({interactions_[begin].user, begin, i});
      begin = i;
    }
  }
}

InteractionLog InteractionLog::build(std::vector<Interaction> interactions,
                                     std::shared_ptr<const Vocabulary> vocabulary, SubsetRole role) {
  if (!std::is_sorted(interactions.begin(), interactions.end(), canonical_less)) {
    std::sort(interactions.begin(), interactions.end(), canonical_less);
  }
  return InteractionLog(std::move(interactions), std::move(vocabulary), role);
}

InteractionLog InteractionLog::adopt_unchecked(std::vector<Interaction> interactions,
                                               std::shared_ptr<const Vocabulary> vocabulary,
                                               SubsetRole role) {
  return InteractionLog(std::move(interactions), std::move(vocabulary), role);
}

std::optional<UserSlice> InteractionLog::find_user(UserHandle user) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), user,
                             [](const UserSlice& s, UserHandle u) { return s.user < u; });
  if (it == users_.end() || it->user != user) return std::nullopt;
  return *it;
}

std::size_t InteractionLog::item_count() const {
  if (!vocabulary_) return 0;
  std::vector<bool> seen(vocabulary_->item_count(), false);
  std::size_t n = 0;
  for (const auto& x : interactions_) {
    if (!seen[index_of(x.item)]) {
      seen[index_of(x.item)] = true;
      ++n;
    }
  }
  return n;
}

InteractionLog InteractionLog::with_role(SubsetRole role) const {
  InteractionLog copy = *this;
  copy.role_ = role;
  return copy;
}

bool InteractionLog::operator==(const InteractionLog& other) const {
  if (role_ != other.role_ || interactions_.size() != other.interactions_.size()) return false;
  if (vocabulary_ == other.vocabulary_) return interactions_ == other.interactions_;
  for (std::size_t i = 0; i < interactions_.size(); ++i) {
    const auto& a = interactions_[i];
    const auto& b = other.interactions_[i];
    if (a.timestamp != b.timestamp || a.ordinal != b.ordinal ||
        user_name(a.user) != other.user_name(b.user) ||
        item_name(a.item) != other.item_name(b.item)) {
      return false;
    }
  }
  return true;
}

InteractionLog derive_log(const InteractionLog& like, std::vector<Interaction> interactions,
                          SubsetRole role) {
  return InteractionLog::build(std::move(interactions), like.shared_vocabulary(), role);
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNegativeTimestamp: return "NegativeTimestamp";
    case ViolationKind::kDuplicateOrdinal: return "DuplicateOrdinal";
    case ViolationKind::kNotCanonical: return "NotCanonical";
    case ViolationKind::kFragmentedUser: return "FragmentedUser";
    case ViolationKind::kEmptySlice: return "EmptySlice";
  }
  return "Unknown";
}

std::vector<Violation> validate_log(const InteractionLog& log) {
  std::vector<Violation> out;
  const auto xs = log.interactions();

  for (const auto& x : xs) {
    if (x.timestamp < 0) {
      out.push_back({ViolationKind::kNegativeTimestamp, x.ordinal,
                     "timestamp " + std::to_string(x.timestamp) + " < 0"});
      break;
    }
  }

  std::unordered_set<std::uint64_t> ordinals;
  ordinals.reserve(xs.size());
  for (const auto& x : xs) {
    if (!ordinals.insert(x.ordinal).second) {
      out.push_back({ViolationKind::kDuplicateOrdinal, x.ordinal,
                     "ordinal " + std::to_string(x.ordinal) + " appears more than once"});
      break;
    }
  }

  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!canonical_less(xs[i - 1], xs[i])) {
      out.push_back({ViolationKind::kNotCanonical, xs[i].ordinal,
                     "position " + std::to_string(i) + " does not follow its predecessor"});
      break;
    }
  }

  std::unordered_set<std::uint32_t> seen_users;
  for (const auto& slice : log.users()) {
    if (!seen_users.insert(index_of(slice.user)).second) {
      out.push_back({ViolationKind::kFragmentedUser, xs[slice.begin].ordinal,
                     "user '" + log.user_name(slice.user) + "' has more than one slice"});
      break;
    }
  }

  for (const auto& slice : log.users()) {
    if (slice.size() == 0) {
      out.push_back({ViolationKind::kEmptySlice, 0, "empty user slice"});
      break;
    }
  }
  return out;
}

}  // namespace splitaudit
