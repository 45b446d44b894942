#pragma once

namespace leadlag::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kValidation = 3, kData = 4 };

/// Entry point of the leadlag tool; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace leadlag::cli
