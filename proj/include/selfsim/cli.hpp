#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace selfsim {

// Exit codes of the experiment runner.
enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

// Runs one subcommand. args excludes the program name, e.g. {"energy", "--n", "3", "--p", "7"}.
// The JSON summary goes to out (and to <out-dir>/<command>.json with --out), messages to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

// FNV-1a of the text, as 16 hex digits; used for the config hash.
std::string fnv1a_hex(const std::string& text);

}  // namespace selfsim
