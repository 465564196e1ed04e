#pragma once

#include <iosfwd>

namespace bife {

/// Entry point of the command-line tool. Returns 0 on success, 2 on bad
/// flags and 1 on runtime failure. Diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bife
