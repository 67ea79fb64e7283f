#pragma once

#include <iosfwd>
#include <string_view>

#include "apollo/avm/program.hpp"
#include "apollo/frontend/checker.hpp"

namespace apollo {

/// Front half of the pipeline: tokenize, parse, check, lower.
/// diagnostics is non-empty exactly when ok is false.
struct CompileResult {
    bool ok = false;
    avm::Program program;
    std::vector<frontend::Diagnostic> diagnostics;
};

CompileResult compile_source(std::string_view source);

namespace cli {

/// The apollo command-line driver: compile / run / check / mem.
/// args excludes the program name. Returns the process exit code:
/// 0 success, 1 compile-time diagnostic or usage/I-O error, 2 VM trap.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cli

}  // namespace apollo
