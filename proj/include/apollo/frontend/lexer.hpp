#pragma once

#include <string_view>

#include "apollo/frontend/token.hpp"

namespace apollo::frontend {

struct LexResult {
    std::vector<Token> tokens;  // ends with EndOfFile on success
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Full token stream, or the tokens up to the first lexical error.
/// A leading +/- adjacent to digits is folded into the numeric literal
/// unless the previous token can produce a value, in which case it is an
/// operator (the grammar allows both readings of "-3").
LexResult tokenize(std::string_view source);

}  // namespace apollo::frontend
