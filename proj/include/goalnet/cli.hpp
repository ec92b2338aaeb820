#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace goalnet {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAccess = 3;
inline constexpr int kExitStore = 4;

/// Runs one command line; args[0] is the program name. Data goes to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace goalnet
