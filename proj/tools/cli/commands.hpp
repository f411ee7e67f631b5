#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "polarkit/error.hpp"

namespace polarkit::cli {

/// Process exit codes: 0 success, 2 usage or format error, 3 I/O error,
/// 4 numerical-domain error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDomain = 4;

int exit_code_for(ErrorKind kind) noexcept;

/// Runs one command line (without the program name). Diagnostics go to `err`
/// as a single line; command output and progress go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polarkit::cli
