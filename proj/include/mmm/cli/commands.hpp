#pragma once

#include <ostream>

namespace mmm::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kInputError = 2, kIoError = 3 };

/// Entry point of the `mmm` tool. Subcommands: simulate, verify, price-zcb,
/// hedge, market-time, surprisal, kl. Arguments of the form key=value are
/// accepted in place of --key value.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmm::cli
