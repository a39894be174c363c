#pragma once

#include <ostream>

namespace aggreg {

// Exit codes: 0 ok, 1 check failure (or internal error), 2 input error, 3 config error.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitInput = 2, kExitConfig = 3 };

// Entry point of the command-line tool; errors are reported on `err` as a
// single line `error: code=<c> kind=<k> message="<text>"`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aggreg
