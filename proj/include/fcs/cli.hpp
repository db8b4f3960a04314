#pragma once

#include <string>
#include <vector>

namespace fcs::cli {

// Exit codes: 0 success, 2 configuration error, 3 numerical-assumption failure. Failures print one JSON object on
// standard error. Option precedence: config file < FCS_* environment variables < command-line flags.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace fcs::cli
