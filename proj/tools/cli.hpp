#ifndef HOBZ_TOOLS_CLI_HPP
#define HOBZ_TOOLS_CLI_HPP

#include <string>
#include <vector>

namespace hobz::cli {

// Runs one subcommand. Returns the process exit status:
// 0 success, 2 validation error, 3 numeric error, 4 I/O error.
int run(std::vector<std::string> args);

}  // namespace hobz::cli

#endif
