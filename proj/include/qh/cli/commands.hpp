#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qh::cli {

/// Runs `qh <args...>`. Exit code 0 when every verdict passes, 1 on a domain
/// error or failed verdict (error name on `err`), 2 on a usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qh::cli
