#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aicp {

/// Entry point behind the `aicp` binary: args exclude the program name.
/// Returns the process exit status; all output goes to the given streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace aicp
