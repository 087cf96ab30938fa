#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hubspoke/error.hpp"
#include "settings.hpp"

namespace hubspoke::cli {

/// Exit codes: 0 success, 1 validation (also conflicts and unknown ids),
/// 2 infeasible routing, 3 I/O.
int exit_code_for(ErrorCode code);

/// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env);

}  // namespace hubspoke::cli
