#pragma once

#include <memory>
#include <string>
#include <vector>

#include "apollo/frontend/token.hpp"
#include "apollo/tensor.hpp"

namespace apollo::frontend {

enum class ValueType { Int, Float, Tensor };

const char* value_type_name(ValueType t);

enum class BinOp { Add, Sub, Mul, Div, Kronecker, KhatriRao, FaceSplit, Cross };

const char* bin_op_symbol(BinOp op);

enum class ExprKind {
    IntLiteral,
    FloatLiteral,
    TensorLiteral,
    VariableRef,
    BinaryOp,
    UnaryNeg,
};

struct Expr {
    ExprKind kind;
    int line = 0;
    int col = 0;

    std::int64_t int_value = 0;   // IntLiteral
    double float_value = 0.0;     // FloatLiteral
    std::string name;             // VariableRef
    BinOp op = BinOp::Add;        // BinaryOp
    std::unique_ptr<Expr> lhs;    // BinaryOp lhs / UnaryNeg operand
    std::unique_ptr<Expr> rhs;    // BinaryOp rhs
    std::vector<std::unique_ptr<Expr>> elements;  // TensorLiteral

    // Filled in by the checker.
    bool annotated = false;
    ValueType type = ValueType::Int;
    Shape shape;  // meaningful when type == Tensor
};

struct LetStatement {
    ValueType declared_type = ValueType::Int;
    std::string name;
    std::unique_ptr<Expr> value;
    int line = 0;
    int col = 0;
};

struct Program {
    std::vector<LetStatement> statements;
};

/// Structural equality, ignoring positions and annotations.
bool ast_equal(const Expr& a, const Expr& b);
bool ast_equal(const Program& a, const Program& b);

/// Renders a program back to Apollo source, fully parenthesized. Reparsing
/// the output yields a structurally identical AST.
std::string pretty_print(const Program& program);

/// Grammar-lexable float spelling: plain decimal digits around a mandatory
/// dot (the grammar has no exponent form), exact under re-lexing.
std::string float_literal_text(double v);

}  // namespace apollo::frontend
