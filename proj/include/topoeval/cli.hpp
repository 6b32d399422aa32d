#pragma once

#include <string>
#include <vector>

namespace topoeval::cli {

// Runs one CLI invocation. Returns the process exit status:
// 0 success, 1 usage error, 2 data error.
int run(const std::vector<std::string>& args);

}  // namespace topoeval::cli
