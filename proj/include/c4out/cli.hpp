#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace c4out {

/// Runs the command line `args` (without the program name). Payloads go to
/// `out` unless --out names a file; diagnostics go to `err` prefixed with
/// `ERROR(<category>):`. Returns 0 on success, 1 usage error, 2 data or
/// domain error, 3 numeric error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace c4out
