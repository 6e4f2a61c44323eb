#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wbary::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on usage, I/O or schema errors and 2 on numerical failure; errors are
/// written to `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wbary::cli
