#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dyve::cli {

// Process exit codes, shared by the binary and in-process tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitBackend = 4;

// Runs one invocation given argv-style arguments without the program name,
// e.g. {"synth", "--config", "run.toml", "--out", "queries.jsonl"}. Progress
// goes to `out`, diagnostics to `err`; the return value is the exit code.
//
// Every stage resumes: existing output records are kept and only missing ids
// are produced, so rerunning a completed stage touches no backend.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace dyve::cli
