#pragma once

namespace splitaudit {

inline constexpr const char* kToolkitVersion = "0.1.0";
// Bumped on any structural change to serialized documents.
inline constexpr int kSchemaVersion = 1;

}  // namespace splitaudit
