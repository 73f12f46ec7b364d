#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spat {

/// Exit codes: 0 success, 1 estimation or data error, 2 usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spat
