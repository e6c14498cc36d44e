#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqrd::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvalid = 2;

// Runs the command line given as arguments (without the program name).
// Summary lines go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace seqrd::cli
