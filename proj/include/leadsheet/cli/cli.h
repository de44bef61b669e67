#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace leadsheet::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags or arguments
  kExitData = 2,      // unreadable or unusable input, unwritable output
  kExitInternal = 3,  // anything else
};

// Runs one subcommand. `args` excludes the program name, e.g.
// {"evaluate", "--corpus", "a.json"}. Normal output goes to `out`, progress
// and diagnostics to `err`.
//
// Every subcommand accepts --seed, --config and --manifest. A config file is
// a JSON object whose keys are flag names with underscores for dashes
// ({"batch_size": 8}); flags given on the command line win. For `serve` the
// file is a service config and LEADSHEET_* environment variables sit between
// the file and the flags. Relative paths resolve against --workspace.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace leadsheet::cli
