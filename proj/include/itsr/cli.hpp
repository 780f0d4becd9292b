#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace itsr {

/// Exit codes: 0 success, 1 unexpected failure, 2 ConfigError or bad usage,
/// 3 IoError, 4 training aborted. Failures print a one-line JSON error record to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itsr
