#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dstorm::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Subcommands: plan, run, sweep, validate-graph, plot. args[0] is the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dstorm::harness
