#pragma once

#include <string>
#include <vector>

namespace curvheat {

// Entry point for the curvheat tool. Exit codes: 0 success, 1 verification
// failure, 2 usage error, 3 input validation error.
int run(const std::vector<std::string>& args);

// Exposed for tests: p-range grammar "start:stop:log", "start:stop:step",
// comma lists and single values.
std::vector<int> parse_p_range(const std::string& text);

}  // namespace curvheat
