#pragma once

#include "tfm/error.hpp"

#include <iosfwd>

namespace tfm {

/// Exit status for an error category; 0 is success, 1 a usage error.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

/// Entry point of the `tfm` tool (subcommands simulate, estimate, bench,
/// capm). Errors are reported on `err` as one line
/// "tfm: error: <category>: <message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tfm
