#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace apollo::frontend {

enum class TokenKind {
    KwLet,
    KwInt,
    KwFloat,
    KwTensor,
    Identifier,
    IntLiteral,
    FloatLiteral,
    Plus,
    Minus,
    Star,
    Slash,
    At,       // kronecker
    Amp,      // khatri-rao
    Percent,  // face-splitting
    Hash,     // cross
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Assign,
    Semicolon,
    EndOfFile,
};

struct Token {
    TokenKind kind = TokenKind::EndOfFile;
    std::string lexeme;
    std::int64_t int_value = 0;
    double float_value = 0.0;
    int line = 0;
    int col = 0;
};

const char* token_kind_name(TokenKind kind);

/// One compiler message, positioned in the source. The driver renders it
/// as file:line:col: message.
struct Diagnostic {
    int line = 0;
    int col = 0;
    std::string message;
};

}  // namespace apollo::frontend
