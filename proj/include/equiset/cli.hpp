#pragma once

// Command-line front end. Subcommands:
//   dim, scheme, basis, verify, gradcheck, signal-gen, train, compare,
//   separation, plot
// Exit codes: 0 success, 1 a check failed, 2 usage or input error.

#include <iosfwd>
#include <string>
#include <vector>

namespace equiset {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace equiset
