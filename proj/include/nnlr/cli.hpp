#pragma once

#include <iosfwd>

namespace nnlr {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitMismatch = 2,
  kExitIo = 3,
};

/// Entry point of the `nnlr` tool. Human-readable text goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nnlr
