#pragma once

#include <exception>
#include <ostream>

namespace multicoap::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUnexpected = 1,
  kConfigError = 2,
  kDataError = 3,
  kNumericalError = 4,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Parses argv and runs simulate, fit, select or benchmark. Errors are
/// reported on err; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace multicoap::cli
