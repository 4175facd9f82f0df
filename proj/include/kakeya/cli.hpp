#pragma once

// Command-line front end.  Grammar:
//   kakeya_lab <perron|kakeya|heisenberg|fefferman|multiplier|dim> [flags]
//   kakeya_lab tubes <gen|analyze> [flags]
// Every run writes its outputs plus a JSON manifest (parameters, seeds,
// replay command, SHA-256 of each output).  `--config file` supplies
// key = value defaults for the same subcommand; flags given on the command
// line win.

#include <iosfwd>
#include <string>
#include <vector>

namespace kakeya::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCheckFailed = 3;

/// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kakeya::cli
