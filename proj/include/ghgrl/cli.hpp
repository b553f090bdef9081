#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ghgrl::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, backend_error = 3 };

/// Entry point shared by the executable and the tests. argv[0] is the
/// program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Arguments without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ghgrl::cli
