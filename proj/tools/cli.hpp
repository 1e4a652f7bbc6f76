#pragma once

#include <iosfwd>

namespace radgest::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;

// Entry point of the `radgest` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radgest::cli
