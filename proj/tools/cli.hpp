#pragma once

#include <iosfwd>

namespace fallsentry::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `fallsentry` tool. Data goes to `out` or to files named
// by flags; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fallsentry::cli
