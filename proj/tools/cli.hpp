#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace codezoom::cli {

enum ExitCode { Ok = 0, Internal = 1, UserError = 2, BackendError = 3, InvalidStateExit = 4 };

/// Runs one command line; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace codezoom::cli
