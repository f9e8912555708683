#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "lshir/search.hpp"

namespace lshir::cli {

/// Runs one command line (arguments without the program name). Normal
/// output goes to `out`, diagnostics to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// JSON rendering of a ranked result, as printed by `query` and `scan`.
std::string query_result_json(const QueryResult& result);

}  // namespace lshir::cli
