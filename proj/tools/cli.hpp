#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace semgeo::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2 };

/// Runs one command line (program name excluded). Results go to `out`,
/// diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semgeo::cli
