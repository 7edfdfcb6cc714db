#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace amscale::cli {

// Exit codes shared by every subcommand.
inline constexpr int kSuccess = 0;
inline constexpr int kInputError = 1;
inline constexpr int kEstimationFailure = 2;

// Entry point behind the `amscale` executable. `args` excludes the program
// name. Reports go to `out` unless --output names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amscale::cli
