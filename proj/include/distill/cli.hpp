#pragma once

namespace distill::cli {

// Parses argv and runs one subcommand.
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.
int run(int argc, const char* const* argv);

} // namespace distill::cli
