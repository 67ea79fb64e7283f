#include "apollo/frontend/ast.hpp"

#include <cstdio>
#include <sstream>

namespace apollo::frontend {

const char* value_type_name(ValueType t) {
    switch (t) {
        case ValueType::Int: return "int";
        case ValueType::Float: return "float";
        case ValueType::Tensor: return "tensor";
    }
    return "?";
}

const char* bin_op_symbol(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Kronecker: return "@";
        case BinOp::KhatriRao: return "&";
        case BinOp::FaceSplit: return "%";
        case BinOp::Cross: return "#";
    }
    return "?";
}

bool ast_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::IntLiteral: return a.int_value == b.int_value;
        case ExprKind::FloatLiteral: return a.float_value == b.float_value;
        case ExprKind::VariableRef: return a.name == b.name;
        case ExprKind::UnaryNeg: return ast_equal(*a.lhs, *b.lhs);
        case ExprKind::BinaryOp:
            return a.op == b.op && ast_equal(*a.lhs, *b.lhs) && ast_equal(*a.rhs, *b.rhs);
        case ExprKind::TensorLiteral: {
            if (a.elements.size() != b.elements.size()) return false;
            for (std::size_t i = 0; i < a.elements.size(); ++i)
                if (!ast_equal(*a.elements[i], *b.elements[i])) return false;
            return true;
        }
    }
    return false;
}

bool ast_equal(const Program& a, const Program& b) {
    if (a.statements.size() != b.statements.size()) return false;
    for (std::size_t i = 0; i < a.statements.size(); ++i) {
        const LetStatement& sa = a.statements[i];
        const LetStatement& sb = b.statements[i];
        if (sa.declared_type != sb.declared_type || sa.name != sb.name) return false;
        if (!ast_equal(*sa.value, *sb.value)) return false;
    }
    return true;
}

std::string float_literal_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s = buf;
    if (s.find('e') == std::string::npos && s.find('E') == std::string::npos) {
        if (s.find('.') == std::string::npos) s += ".0";
        return s;
    }
    // Expand scientific notation; a double's decimal expansion is finite
    // (at most ~309 integer digits and 1074 fractional digits).
    std::vector<char> big(2048);
    std::snprintf(big.data(), big.size(), "%.1080f", v);
    s = big.data();
    std::size_t last = s.find_last_not_of('0');
    if (s[last] == '.') ++last;  // keep one fractional digit
    return s.substr(0, last + 1);
}

namespace {

void print_expr(const Expr& e, std::ostringstream& out) {
    switch (e.kind) {
        case ExprKind::IntLiteral:
            out << e.int_value;
            break;
        case ExprKind::FloatLiteral:
            out << float_literal_text(e.float_value);
            break;
        case ExprKind::VariableRef:
            out << e.name;
            break;
        case ExprKind::UnaryNeg:
            out << "(- ";  // space keeps the '-' an operator under re-lexing
            print_expr(*e.lhs, out);
            out << ")";
            break;
        case ExprKind::BinaryOp:
            out << "(";
            print_expr(*e.lhs, out);
            out << " " << bin_op_symbol(e.op) << " ";
            print_expr(*e.rhs, out);
            out << ")";
            break;
        case ExprKind::TensorLiteral: {
            out << "{";
            for (std::size_t i = 0; i < e.elements.size(); ++i) {
                if (i) out << ", ";
                print_expr(*e.elements[i], out);
            }
            out << "}";
            break;
        }
    }
}

}  // namespace

std::string pretty_print(const Program& program) {
    std::ostringstream out;
    for (const LetStatement& s : program.statements) {
        out << "let " << value_type_name(s.declared_type) << " " << s.name << " = ";
        print_expr(*s.value, out);
        out << ";\n";
    }
    return out.str();
}

}  // namespace apollo::frontend
