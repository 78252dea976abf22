#pragma once

#include <string>
#include <vector>

namespace ld3::cli {

/// Entry point behind the binary. Exit codes: 0 success (or SDC = 0),
/// 2 usage/config error, 3 direct discrimination detected (discover/audit),
/// 4 estimation failure.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace ld3::cli
