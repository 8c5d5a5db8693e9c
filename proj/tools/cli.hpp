#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rggm::cli {

// Exit codes: 0 success, 1 validation/usage error, 2 numerical failure
// (including verification checks that did not pass).
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

// args excludes the program name. Results go to `out`, diagnostics and
// structured errors to `err`.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rggm::cli
