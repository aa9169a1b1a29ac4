#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wmcp::cli {

// args excludes the program name. Returns the process exit code:
// 0 success, 1 operation error or findings, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wmcp::cli
