#include "apollo/frontend/lexer.hpp"

#include <cctype>
#include <cstdlib>
#include <string>

namespace apollo::frontend {

const char* token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::KwLet: return "'let'";
        case TokenKind::KwInt: return "'int'";
        case TokenKind::KwFloat: return "'float'";
        case TokenKind::KwTensor: return "'tensor'";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::IntLiteral: return "integer literal";
        case TokenKind::FloatLiteral: return "float literal";
        case TokenKind::Plus: return "'+'";
        case TokenKind::Minus: return "'-'";
        case TokenKind::Star: return "'*'";
        case TokenKind::Slash: return "'/'";
        case TokenKind::At: return "'@'";
        case TokenKind::Amp: return "'&'";
        case TokenKind::Percent: return "'%'";
        case TokenKind::Hash: return "'#'";
        case TokenKind::LParen: return "'('";
        case TokenKind::RParen: return "')'";
        case TokenKind::LBrace: return "'{'";
        case TokenKind::RBrace: return "'}'";
        case TokenKind::Comma: return "','";
        case TokenKind::Assign: return "'='";
        case TokenKind::Semicolon: return "';'";
        case TokenKind::EndOfFile: return "end of file";
    }
    return "?";
}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Tokens after which +/- must be a binary operator.
bool produces_value(TokenKind k) {
    return k == TokenKind::Identifier || k == TokenKind::IntLiteral ||
           k == TokenKind::FloatLiteral || k == TokenKind::RParen || k == TokenKind::RBrace;
}

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;
    LexResult result;

    char peek(std::size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }

    void advance() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void error(int l, int c, std::string message) {
        result.diagnostics.push_back({l, c, std::move(message)});
    }

    void emit(TokenKind kind, std::string lexeme, int l, int c) {
        result.tokens.push_back({kind, std::move(lexeme), 0, 0.0, l, c});
    }

    TokenKind prev_kind() const {
        return result.tokens.empty() ? TokenKind::EndOfFile : result.tokens.back().kind;
    }

    void lex_number(int l, int c) {
        std::string text;
        if (peek() == '+' || peek() == '-') {
            text += peek();
            advance();
        }
        bool has_int_part = false;
        while (is_digit(peek())) {
            text += peek();
            advance();
            has_int_part = true;
        }
        if (peek() != '.') {
            if (!has_int_part) {
                error(l, c, "malformed number");
                return;
            }
            Token t{TokenKind::IntLiteral, text, 0, 0.0, l, c};
            t.int_value = std::strtoll(text.c_str(), nullptr, 10);
            result.tokens.push_back(std::move(t));
            return;
        }
        text += '.';
        advance();
        bool has_fraction = false;
        while (is_digit(peek())) {
            text += peek();
            advance();
            has_fraction = true;
        }
        if (!has_fraction) {
            error(line, col, "expected digit after '.' in float literal");
            return;
        }
        Token t{TokenKind::FloatLiteral, text, 0, 0.0, l, c};
        t.float_value = std::strtod(text.c_str(), nullptr);
        result.tokens.push_back(std::move(t));
    }

    void run() {
        while (pos < src.size() && result.diagnostics.empty()) {
            char ch = peek();
            if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                advance();
                continue;
            }
            int l = line, c = col;
            if (is_ident_start(ch)) {
                std::string text;
                while (is_ident_char(peek())) {
                    text += peek();
                    advance();
                }
                TokenKind kind = TokenKind::Identifier;
                if (text == "let") kind = TokenKind::KwLet;
                else if (text == "int") kind = TokenKind::KwInt;
                else if (text == "float") kind = TokenKind::KwFloat;
                else if (text == "tensor") kind = TokenKind::KwTensor;
                emit(kind, std::move(text), l, c);
                continue;
            }
            if (is_digit(ch) || (ch == '.' && is_digit(peek(1)))) {
                lex_number(l, c);
                continue;
            }
            if ((ch == '+' || ch == '-') && !produces_value(prev_kind()) &&
                (is_digit(peek(1)) || (peek(1) == '.' && is_digit(peek(2))))) {
                lex_number(l, c);
                continue;
            }
            switch (ch) {
                case '+': emit(TokenKind::Plus, "+", l, c); break;
                case '-': emit(TokenKind::Minus, "-", l, c); break;
                case '*': emit(TokenKind::Star, "*", l, c); break;
                case '/': emit(TokenKind::Slash, "/", l, c); break;
                case '@': emit(TokenKind::At, "@", l, c); break;
                case '&': emit(TokenKind::Amp, "&", l, c); break;
                case '%': emit(TokenKind::Percent, "%", l, c); break;
                case '#': emit(TokenKind::Hash, "#", l, c); break;
                case '(': emit(TokenKind::LParen, "(", l, c); break;
                case ')': emit(TokenKind::RParen, ")", l, c); break;
                case '{': emit(TokenKind::LBrace, "{", l, c); break;
                case '}': emit(TokenKind::RBrace, "}", l, c); break;
                case ',': emit(TokenKind::Comma, ",", l, c); break;
                case '=': emit(TokenKind::Assign, "=", l, c); break;
                case ';': emit(TokenKind::Semicolon, ";", l, c); break;
                case '.':
                    error(l, c, "expected digit after '.' in float literal");
                    continue;
                default:
                    error(l, c, std::string("illegal character '") + ch + "'");
                    continue;
            }
            advance();
        }
        if (result.diagnostics.empty())
            emit(TokenKind::EndOfFile, "", line, col);
    }
};

}  // namespace

LexResult tokenize(std::string_view source) {
    Lexer lexer{source};
    lexer.run();
    return std::move(lexer.result);
}

}  // namespace apollo::frontend
