#pragma once

#include <string>
#include <vector>

namespace gd {

// Runs a CLI invocation (arguments without the program name). Exit codes:
// 0 success, 1 validation/usage error, 2 I/O error.
int cli_run(const std::vector<std::string>& args);

}  // namespace gd
