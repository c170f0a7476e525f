#pragma once

#include <string>
#include <vector>

namespace tvart::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailed = 1; // at least one requested run failed
inline constexpr int kExitUsage = 2;     // bad flags, config or input

/// Full command-line entry point; args[0] is the program name.
int run(const std::vector<std::string>& args);

} // namespace tvart::cli
