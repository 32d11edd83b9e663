#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsan::cli {

// Entry point of the `qsan` executable. `args` includes the program name.
// Returns 0 on success; failures print one "error: ..." line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qsan::cli
