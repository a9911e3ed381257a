#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace locrom {

/// Parses argv-style arguments (argv[0] included) and runs one subcommand.
/// Failures are reported on err as a JSON object; the return value is the
/// process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace locrom
