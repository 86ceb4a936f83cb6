#pragma once

#include <string>
#include <vector>

namespace etale {

// Exit codes: 0 success, 1 domain error, 2 usage error.
struct CommandResult {
  int exit_code = 0;
  std::string output;  // report bytes (empty when written to --out)
  std::string error;   // human-readable diagnostics
};

// args excludes the program name, e.g. {"orbits", "A.spec", "--format", "csv"}.
CommandResult run_command(const std::vector<std::string>& args);

}  // namespace etale
