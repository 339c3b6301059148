#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace s2r {

// Entry point of the s2r tool. `args` excludes the program name. Returns the
// process exit status; failures print a one-line JSON error record to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Exit status used for each error kind.
int exit_code_for(const std::string& kind);

}  // namespace s2r
