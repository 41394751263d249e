#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mbx::cli {

/// Runs the command line tool. Exit codes: 0 the property holds / yes,
/// 1 violated / no, 2 input or usage error, 3 exploration budget exceeded.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbx::cli
