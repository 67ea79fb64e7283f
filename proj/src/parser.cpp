#include "apollo/frontend/parser.hpp"

namespace apollo::frontend {

namespace {

struct ParseError {};  // unwinds to the statement loop

struct Parser {
    const std::vector<Token>& tokens;
    std::size_t pos = 0;
    ParseResult result;

    const Token& peek() const { return tokens[pos]; }
    const Token& advance() { return tokens[pos < tokens.size() - 1 ? pos++ : pos]; }
    bool at(TokenKind k) const { return peek().kind == k; }

    [[noreturn]] void fail(const Token& t, std::string message) {
        result.diagnostics.push_back({t.line, t.col, std::move(message)});
        throw ParseError{};
    }

    const Token& expect(TokenKind k, const char* what) {
        if (!at(k)) fail(peek(), std::string("expected ") + what + ", got " +
                                     token_kind_name(peek().kind));
        return advance();
    }

    std::unique_ptr<Expr> make(ExprKind kind, const Token& t) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->line = t.line;
        e->col = t.col;
        return e;
    }

    // <tensor> ::= '{' [<tensor>] {',' <tensor>} '}', base case a list of
    // comma separated numeric literals.
    std::unique_ptr<Expr> parse_tensor_literal() {
        const Token& open = expect(TokenKind::LBrace, "'{'");
        auto lit = make(ExprKind::TensorLiteral, open);
        if (!at(TokenKind::RBrace)) {
            lit->elements.push_back(parse_tensor_element());
            while (at(TokenKind::Comma)) {
                advance();
                lit->elements.push_back(parse_tensor_element());
            }
        }
        expect(TokenKind::RBrace, "'}' or ',' in tensor literal");
        return lit;
    }

    std::unique_ptr<Expr> parse_tensor_element() {
        if (at(TokenKind::LBrace)) return parse_tensor_literal();
        if (at(TokenKind::IntLiteral)) {
            const Token& t = advance();
            auto e = make(ExprKind::IntLiteral, t);
            e->int_value = t.int_value;
            return e;
        }
        if (at(TokenKind::FloatLiteral)) {
            const Token& t = advance();
            auto e = make(ExprKind::FloatLiteral, t);
            e->float_value = t.float_value;
            return e;
        }
        fail(peek(), std::string("expected numeric literal or nested tensor in tensor literal, got ") +
                         token_kind_name(peek().kind));
    }

    // <primary> ::= <integer> | <floating-point> | <identifier> | <tensor> | [-]<term>
    std::unique_ptr<Expr> parse_primary() {
        switch (peek().kind) {
            case TokenKind::IntLiteral: {
                const Token& t = advance();
                auto e = make(ExprKind::IntLiteral, t);
                e->int_value = t.int_value;
                return e;
            }
            case TokenKind::FloatLiteral: {
                const Token& t = advance();
                auto e = make(ExprKind::FloatLiteral, t);
                e->float_value = t.float_value;
                return e;
            }
            case TokenKind::Identifier: {
                const Token& t = advance();
                auto e = make(ExprKind::VariableRef, t);
                e->name = t.lexeme;
                return e;
            }
            case TokenKind::LBrace:
                return parse_tensor_literal();
            case TokenKind::Minus: {
                const Token& t = advance();
                auto e = make(ExprKind::UnaryNeg, t);
                e->lhs = parse_term();
                return e;
            }
            default:
                fail(peek(), std::string("expected expression, got ") +
                                 token_kind_name(peek().kind));
        }
    }

    // <factor> ::= '(' <expr> ')' | <primary>
    std::unique_ptr<Expr> parse_factor() {
        if (at(TokenKind::LParen)) {
            advance();
            auto e = parse_expr();
            expect(TokenKind::RParen, "')'");
            return e;
        }
        return parse_primary();
    }

    static bool term_op(TokenKind k, BinOp& op) {
        switch (k) {
            case TokenKind::Star: op = BinOp::Mul; return true;
            case TokenKind::Slash: op = BinOp::Div; return true;
            case TokenKind::At: op = BinOp::Kronecker; return true;
            case TokenKind::Amp: op = BinOp::KhatriRao; return true;
            case TokenKind::Percent: op = BinOp::FaceSplit; return true;
            case TokenKind::Hash: op = BinOp::Cross; return true;
            default: return false;
        }
    }

    // <term> ::= <factor> {('*'|'/'|'@'|'&'|'%'|'#') <factor>}
    std::unique_ptr<Expr> parse_term() {
        auto lhs = parse_factor();
        BinOp op;
        while (term_op(peek().kind, op)) {
            const Token& t = advance();
            auto node = make(ExprKind::BinaryOp, t);
            node->op = op;
            node->lhs = std::move(lhs);
            node->rhs = parse_factor();
            lhs = std::move(node);
        }
        return lhs;
    }

    // <expr> ::= <term> {('+'|'-') <term>}
    std::unique_ptr<Expr> parse_expr() {
        auto lhs = parse_term();
        while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
            const Token& t = advance();
            auto node = make(ExprKind::BinaryOp, t);
            node->op = t.kind == TokenKind::Plus ? BinOp::Add : BinOp::Sub;
            node->lhs = std::move(lhs);
            node->rhs = parse_term();
            lhs = std::move(node);
        }
        return lhs;
    }

    // <statement> ::= 'let' <type> <identifier> '=' <expr> ';'
    LetStatement parse_statement() {
        LetStatement s;
        const Token& let = expect(TokenKind::KwLet, "'let'");
        s.line = let.line;
        s.col = let.col;
        switch (peek().kind) {
            case TokenKind::KwInt: s.declared_type = ValueType::Int; break;
            case TokenKind::KwFloat: s.declared_type = ValueType::Float; break;
            case TokenKind::KwTensor: s.declared_type = ValueType::Tensor; break;
            default:
                fail(peek(), std::string("expected type ('int', 'float' or 'tensor'), got ") +
                                 token_kind_name(peek().kind));
        }
        advance();
        s.name = expect(TokenKind::Identifier, "identifier").lexeme;
        expect(TokenKind::Assign, "'='");
        s.value = parse_expr();
        expect(TokenKind::Semicolon, "';'");
        return s;
    }

    void sync_to_statement() {
        while (!at(TokenKind::EndOfFile)) {
            if (advance().kind == TokenKind::Semicolon) return;
        }
    }

    void run() {
        while (!at(TokenKind::EndOfFile)) {
            try {
                result.program.statements.push_back(parse_statement());
            } catch (const ParseError&) {
                sync_to_statement();
            }
        }
    }
};

}  // namespace

ParseResult parse(const std::vector<Token>& tokens) {
    if (tokens.empty()) return {};
    Parser parser{tokens};
    parser.run();
    return std::move(parser.result);
}

}  // namespace apollo::frontend
