#pragma once

#include <ostream>

namespace shiftsum::cli {

/// Name of the environment variable holding the default output directory
/// for `run`.
inline constexpr const char* kOutputDirEnv = "SHIFTSUM_OUTPUT_DIR";

/// Runs one command. Returns 0 on success, 1 on a computation error and 2 on
/// a usage error. Machine output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shiftsum::cli
