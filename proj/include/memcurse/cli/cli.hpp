#pragma once

#include <string>
#include <vector>

namespace memcurse::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitValidation = 4;

int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace memcurse::cli
