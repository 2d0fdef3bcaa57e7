#pragma once

#include <ostream>
#include <string>
#include <string_view>

namespace augundo::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kInvariantFailure = 3,
};

/// `error: code=<code> message="<message>"` with quotes and backslashes
/// escaped and newlines flattened, so every failure is one parsable line.
std::string format_error(std::string_view code, std::string_view message);

/// Entry point of the `augundo` executable. Subcommands: augment, undo, loss,
/// harness, metrics, scenegen.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace augundo::cli
