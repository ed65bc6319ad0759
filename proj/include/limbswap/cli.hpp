#pragma once

#include <iosfwd>
#include <string>

#include "limbswap/pose.hpp"

namespace limbswap {

/// Exit codes of the `limbswap` tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Runs the command line tool. Results go to `out`, diagnostics to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Reads a `.poses.jsonl` trace, or a generator document ({"generator": ...}) which is
/// synthesized on the fly.
PoseTrace load_trace_any(const std::string& path);

}  // namespace limbswap
