#pragma once

#include <string>
#include <vector>

namespace mcdist {

// Runs one CLI invocation (subcommand + flags). Returns the process exit
// status: 0 on success, 2 on command-line errors, 1 on runtime failures
// (a machine-readable "ErrorClass: message" line goes to stderr).
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace mcdist
