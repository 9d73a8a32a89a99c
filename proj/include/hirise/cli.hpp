#pragma once

#include <string>
#include <vector>

namespace hirise {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

// Full command-line entry point (subcommands simulate / cost / sweep /
// validate). Errors go to stderr as "error[<exit code>]: ..." and the
// matching code is returned; exposed here so tests can drive it in-process.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);   // args without argv[0]

}  // namespace hirise
