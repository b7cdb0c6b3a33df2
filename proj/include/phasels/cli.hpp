#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phasels {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `phasels` command. Subcommands: solve, sweep, check,
/// report, gen-matrix. Returns 0 on success, 1 on runtime or check failure,
/// 2 on usage or config errors.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phasels
