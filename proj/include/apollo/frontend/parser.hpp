#pragma once

#include "apollo/frontend/ast.hpp"
#include "apollo/frontend/lexer.hpp"

namespace apollo::frontend {

struct ParseResult {
    Program program;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Recursive descent over the Apollo grammar. On an error the parser
/// reports one diagnostic, skips to the next ';', and resumes, so several
/// statements can be diagnosed in one pass.
ParseResult parse(const std::vector<Token>& tokens);

}  // namespace apollo::frontend
