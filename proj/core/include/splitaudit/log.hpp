#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace splitaudit {

// Epoch milliseconds, UTC.
using Timestamp = std::int64_t;

// Dense handles for interned identifiers. Handle order equals the lexicographic
// order of the underlying strings, so sorting by handle sorts by identifier.
enum class UserHandle : std::uint32_t {};
enum class ItemHandle : std::uint32_t {};

constexpr std::uint32_t index_of(UserHandle h) { return static_cast<std::uint32_t>(h); }
constexpr std::uint32_t index_of(ItemHandle h) { return static_cast<std::uint32_t>(h); }

struct Interaction {
  UserHandle user{};
  ItemHandle item{};
  Timestamp timestamp = 0;
  std::uint64_t ordinal = 0;

  bool operator==(const Interaction&) const = default;
};

// (user, timestamp, ordinal) ascending.
inline bool canonical_less(const Interaction& a, const Interaction& b) {
  if (a.user != b.user) return a.user < b.user;
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.ordinal < b.ordinal;
}

// (timestamp, ordinal) ascending; the global time order used by temporal splits.
inline bool time_less(const Interaction& a, const Interaction& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.ordinal < b.ordinal;
}

enum class SubsetRole { kRaw, kPreprocessed, kTrain, kValInput, kValTarget, kTestInput, kTestTarget };

std::string_view role_name(SubsetRole role);
std::optional<SubsetRole> role_from_name(std::string_view name);

// Immutable string <-> handle tables shared by every log derived from one load.
class Vocabulary {
 public:
  // Inputs need not be sorted or unique.
  Vocabulary(std::vector<std::string> users, std::vector<std::string> items);
  Vocabulary(const Vocabulary&) = delete;
  Vocabulary& operator=(const Vocabulary&) = delete;

  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const { return items_.size(); }

  const std::string& user_name(UserHandle h) const { return users_[index_of(h)]; }
  const std::string& item_name(ItemHandle h) const { return items_[index_of(h)]; }

  std::optional<UserHandle> find_user(std::string_view name) const;
  std::optional<ItemHandle> find_item(std::string_view name) const;

 private:
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::unordered_map<std::string_view, std::uint32_t> user_lookup_;
  std::unordered_map<std::string_view, std::uint32_t> item_lookup_;
};

struct UserSlice {
  UserHandle user{};
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const UserSlice&) const = default;
};

class InteractionLog {
 public:
  InteractionLog() = default;

  // Sorts into canonical order and builds the per-user index.
  static InteractionLog build(std::vector<Interaction> interactions,
                              std::shared_ptr<const Vocabulary> vocabulary, SubsetRole role);

  // Keeps the given order and indexes maximal runs of equal users. The result
  // may violate the log invariants; validate_log reports how.
  static InteractionLog adopt_unchecked(std::vector<Interaction> interactions,
                                        std::shared_ptr<const Vocabulary> vocabulary,
                                        SubsetRole role);

  std::span<const Interaction> interactions() const { return interactions_; }
  std::span<const UserSlice> users() const { return users_; }
  std::span<const Interaction> sequence(const UserSlice& slice) const {
    return std::span<const Interaction>(interactions_).subspan(slice.begin, slice.size());
  }
  // Slice of one user, if present.
  std::optional<UserSlice> find_user(UserHandle user) const;

  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }
  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const;

  SubsetRole role() const { return role_; }
  InteractionLog with_role(SubsetRole role) const;

  const Vocabulary& vocabulary() const { return *vocabulary_; }
  const std::shared_ptr<const Vocabulary>& shared_vocabulary() const { return vocabulary_; }
  const std::string& user_name(UserHandle h) const { return vocabulary_->user_name(h); }
  const std::string& item_name(ItemHandle h) const { return vocabulary_->item_name(h); }

  // Same role and the same interactions, identifiers compared by name.
  bool operator==(const InteractionLog& other) const;

 private:
  InteractionLog(std::vector<Interaction> interactions, std::shared_ptr<const Vocabulary> vocabulary,
                 SubsetRole role);

  std::vector<Interaction> interactions_;
  std::vector<UserSlice> users_;
  std::shared_ptr<const Vocabulary> vocabulary_;
  SubsetRole role_ = SubsetRole::kRaw;
};

// Builds a log that shares `like`'s vocabulary.
InteractionLog derive_log(const InteractionLog& like, std::vector<Interaction> interactions,
                          SubsetRole role);

enum class ViolationKind { kNegativeTimestamp, kDuplicateOrdinal, kNotCanonical, kFragmentedUser, kEmptySlice };

std::string_view violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind{};
  std::uint64_t ordinal = 0;  // first offending interaction
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// One entry per violated invariant, in ViolationKind order. Empty iff valid.
std::vector<Violation> validate_log(const InteractionLog& log);

}  // namespace splitaudit
