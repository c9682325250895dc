#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pantr::tools {

/// Benchmark driver. args excludes the program name. Returns 0 on success,
/// 1 on a usage error and 2 when a solver failed in any run.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pantr::tools
