#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace mocpd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Runs the full command line. Returns the process exit code: 0 on
// success, 2 on usage errors, 1 on runtime failures. Errors are written
// to `err` as one-line JSON.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace mocpd::cli
