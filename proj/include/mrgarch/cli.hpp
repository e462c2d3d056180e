#pragma once

#include <string>
#include <vector>

namespace mrg::cli {

/// Exit codes of the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;       // data, argument and usage errors
inline constexpr int kExitNumerical = 2;  // numerical, rank and estimation failures

/// Entry point of `mrgarch_cli`; callable in-process.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace mrg::cli
