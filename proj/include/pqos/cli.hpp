#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pqos::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `pqos` tool. `args` excludes the program name.
/// Diagnostics go to `err`; short result summaries go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pqos::cli
