#pragma once

#include <string>
#include <vector>

namespace tudiff::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;    // config or usage error
inline constexpr int kExitMixing = 2;    // geometric mixing detected
inline constexpr int kExitDiverged = 3;  // training produced non-finite loss
inline constexpr int kExitCorrupt = 4;   // corrupt artifact (checkpoint)

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace tudiff::cli
