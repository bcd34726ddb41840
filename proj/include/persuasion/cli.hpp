#pragma once

#include <string>
#include <vector>

namespace persuasion {

/// Entry point behind the persuasion binary; args exclude argv[0].
/// Exit codes: 0 success, 1 data error, 2 usage error, 3 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace persuasion
