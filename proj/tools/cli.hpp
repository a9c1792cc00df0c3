#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace jutila::cli {

// Runs one CLI invocation; returns the process exit code
// (0 ok, 2 validation error, 3 budget exceeded, 4 unsupported twist).
// Output goes to `out` when the --out target is "-".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jutila::cli
