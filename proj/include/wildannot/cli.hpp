#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wildannot {

// Exit codes of the command-line tool.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;  // argument, manifest or input-format errors
constexpr int kExitIo = 2;     // filesystem failures

// Runs the `wildannot` tool on `args` (excluding the program name).
// Machine-readable results go to files and `out`; diagnostics to stderr.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace wildannot
