#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gestfuse {

// Runs the command-line front end: convert | inspect | train | eval |
// replay | bench. `args` excludes the program name. Returns the process
// exit code: 0 success, 1 runtime error, 2 usage error. All normal output
// goes to `out`, diagnostics to `err`; nothing is written to the global
// std streams, so tests can drive the CLI in-process.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gestfuse
