#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace auditplan {

/// Runs the command-line interface. Exit codes: 0 success, 1 usage error,
/// 2 data error. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace auditplan
