#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fraclab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. args excludes the program name. Results go to
/// files or `out`; the resolved configuration and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fraclab::cli
