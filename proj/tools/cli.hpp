#pragma once

#include <iosfwd>

namespace splitaudit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlert = 2;

// Parses argv and runs one subcommand. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace splitaudit::cli
