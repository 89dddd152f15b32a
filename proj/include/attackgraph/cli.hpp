#pragma once

// Command-line front end. Each invocation opens the workspace archive
// (--graph or ATTACKGRAPH_WORKSPACE) under an advisory lock, runs one
// command, writes the archive back when the command mutates it, and prints
// a JSON run report on `out`.
//
// Exit codes: 0 ok, 1 other failure, 2 usage, 3 unreadable input file,
// 4 unknown name, 5 merge-session state.

#include <ostream>
#include <string>
#include <vector>

namespace ag {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitInput = 3,
    kExitUnknownName = 4,
    kExitSessionState = 5,
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ag
