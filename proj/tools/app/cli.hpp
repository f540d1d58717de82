#pragma once

#include <iosfwd>

namespace artss::app {

// Parses argv and runs one subcommand. Returns the process exit code; errors
// are reported on `err` as a single JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace artss::app
