#include "apollo/frontend/checker.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace apollo::frontend {

namespace {

struct StatementError {};  // first error per statement, then move on

class Checker {
public:
    explicit Checker(Program& program) : program_(program) {}

    CheckResult run() {
        for (LetStatement& s : program_.statements) {
            try {
                check_statement(s);
            } catch (const StatementError&) {
                // move to the next statement; the variable stays unbound
            }
        }
        return std::move(result_);
    }

private:
    Program& program_;
    CheckResult result_;
    std::map<std::string, std::size_t> by_name_;  // name -> index into symbols

    [[noreturn]] void fail(const Expr& at, std::string message) {
        result_.diagnostics.push_back({at.line, at.col, std::move(message)});
        throw StatementError{};
    }

    void check_statement(LetStatement& s) {
        if (by_name_.contains(s.name)) {
            result_.diagnostics.push_back({s.line, s.col, "redeclaration of '" + s.name + "'"});
            throw StatementError{};
        }

        check_expr(*s.value);

        ValueType t = s.value->type;
        bool compatible = t == s.declared_type ||
                          (s.declared_type == ValueType::Float && t == ValueType::Int);
        if (!compatible)
            fail(*s.value, std::string("expression has ") + value_type_name(t) +
                               " type, declared " + value_type_name(s.declared_type));

        Symbol sym;
        sym.name = s.name;
        sym.type = s.declared_type;
        if (t == ValueType::Tensor) sym.shape = s.value->shape;
        sym.global_index = static_cast<std::int64_t>(result_.symbols.size());
        sym.line = s.line;
        by_name_[s.name] = result_.symbols.size();
        result_.symbols.push_back(sym);
    }

    void annotate(Expr& e, ValueType t, Shape shape = {}) {
        e.annotated = true;
        e.type = t;
        e.shape = std::move(shape);
    }

    bool is_scalar(const Expr& e) const { return e.type != ValueType::Tensor; }

    ValueType promote(const Expr& a, const Expr& b) const {
        return (a.type == ValueType::Int && b.type == ValueType::Int) ? ValueType::Int
                                                                      : ValueType::Float;
    }

    void check_expr(Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLiteral:
                annotate(e, ValueType::Int);
                return;
            case ExprKind::FloatLiteral:
                annotate(e, ValueType::Float);
                return;
            case ExprKind::VariableRef: {
                auto it = by_name_.find(e.name);
                if (it == by_name_.end())
                    fail(e, "use of undeclared identifier '" + e.name + "'");
                const Symbol& sym = result_.symbols[it->second];
                annotate(e, sym.type, sym.shape);
                return;
            }
            case ExprKind::TensorLiteral: {
                annotate(e, ValueType::Tensor, literal_shape(e));
                return;
            }
            case ExprKind::UnaryNeg: {
                check_expr(*e.lhs);
                annotate(e, e.lhs->type, e.lhs->shape);
                return;
            }
            case ExprKind::BinaryOp:
                check_binary(e);
                return;
        }
    }

    // Rectangular nesting: all siblings share a shape; integer elements are
    // promoted to float, so element type never affects the shape.
    Shape literal_shape(Expr& lit) {
        if (lit.elements.empty()) fail(lit, "empty tensor literal");
        std::optional<Shape> element_shape;
        for (auto& elem : lit.elements) {
            Shape s;
            if (elem->kind == ExprKind::TensorLiteral) {
                s = literal_shape(*elem);
                annotate(*elem, ValueType::Tensor, s);
            } else {
                check_expr(*elem);  // Int/Float literal, rank-0 element
            }
            if (!element_shape)
                element_shape = s;
            else if (*element_shape != s)
                fail(*elem, "ragged tensor literal: sibling sub-tensors have shapes " +
                                to_string(*element_shape) + " and " + to_string(s));
        }
        std::vector<std::int64_t> dims{static_cast<std::int64_t>(lit.elements.size())};
        for (std::int64_t d : element_shape->dims()) dims.push_back(d);
        return Shape{dims};
    }

    void check_binary(Expr& e) {
        check_expr(*e.lhs);
        check_expr(*e.rhs);
        Expr& a = *e.lhs;
        Expr& b = *e.rhs;
        switch (e.op) {
            case BinOp::Add:
            case BinOp::Sub: {
                const char* sym = bin_op_symbol(e.op);
                if (is_scalar(a) && is_scalar(b)) {
                    annotate(e, promote(a, b));
                } else if (!is_scalar(a) && !is_scalar(b)) {
                    if (a.shape != b.shape)
                        fail(e, std::string("elementwise ") + sym + " needs equal shapes, got " +
                                    to_string(a.shape) + " and " + to_string(b.shape));
                    annotate(e, ValueType::Tensor, a.shape);
                } else {
                    fail(e, std::string("operator ") + sym +
                                " needs two scalars or two tensors");
                }
                return;
            }
            case BinOp::Mul: {
                if (is_scalar(a) && is_scalar(b)) {
                    annotate(e, promote(a, b));
                } else if (is_scalar(a) != is_scalar(b)) {
                    annotate(e, ValueType::Tensor, is_scalar(a) ? b.shape : a.shape);
                } else {
                    check_dot(e, a, b);
                }
                return;
            }
            case BinOp::Div:
                if (!is_scalar(a) || !is_scalar(b))
                    fail(e, "operator / is not defined for tensors");
                annotate(e, promote(a, b));
                return;
            case BinOp::Kronecker: {
                require_tensors(e, a, b);
                int rank = std::max(a.shape.rank(), b.shape.rank());
                std::vector<std::int64_t> dims(static_cast<std::size_t>(rank), 1);
                for (int k = 0; k < a.shape.rank(); ++k)
                    dims[static_cast<std::size_t>(rank - a.shape.rank() + k)] *= a.shape.extent(k);
                for (int k = 0; k < b.shape.rank(); ++k)
                    dims[static_cast<std::size_t>(rank - b.shape.rank() + k)] *= b.shape.extent(k);
                annotate(e, ValueType::Tensor, Shape{dims});
                return;
            }
            case BinOp::KhatriRao: {
                require_tensors(e, a, b);
                if (a.shape.rank() != 2 || b.shape.rank() != 2)
                    fail(e, "operator & needs two matrices, got " + to_string(a.shape) +
                                " and " + to_string(b.shape));
                if (a.shape.extent(1) != b.shape.extent(1))
                    fail(e, "operator & needs equal column counts, got " +
                                std::to_string(a.shape.extent(1)) + " and " +
                                std::to_string(b.shape.extent(1)));
                annotate(e, ValueType::Tensor,
                         Shape{{a.shape.extent(0) * b.shape.extent(0), a.shape.extent(1)}});
                return;
            }
            case BinOp::FaceSplit: {
                require_tensors(e, a, b);
                if (a.shape.rank() != 2 || b.shape.rank() != 2)
                    fail(e, "operator % needs two matrices, got " + to_string(a.shape) +
                                " and " + to_string(b.shape));
                if (a.shape.extent(0) != b.shape.extent(0))
                    fail(e, "operator % needs equal row counts, got " +
                                std::to_string(a.shape.extent(0)) + " and " +
                                std::to_string(b.shape.extent(0)));
                annotate(e, ValueType::Tensor,
                         Shape{{a.shape.extent(0), a.shape.extent(1) * b.shape.extent(1)}});
                return;
            }
            case BinOp::Cross: {
                require_tensors(e, a, b);
                bool ok3 = a.shape.rank() == 1 && a.shape.extent(0) == 3 &&
                           b.shape.rank() == 1 && b.shape.extent(0) == 3;
                if (!ok3)
                    fail(e, "operator # needs two length-3 vectors, got " +
                                to_string(a.shape) + " and " + to_string(b.shape));
                annotate(e, ValueType::Tensor, Shape{{3}});
                return;
            }
        }
    }

    void require_tensors(Expr& e, const Expr& a, const Expr& b) {
        if (is_scalar(a) || is_scalar(b))
            fail(e, std::string("operator ") + bin_op_symbol(e.op) +
                        " needs tensor operands");
    }

    void check_dot(Expr& e, const Expr& a, const Expr& b) {
        int m = a.shape.rank(), n = b.shape.rank();
        std::int64_t ca = a.shape.extent(m - 1);
        std::int64_t cb = n >= 2 ? b.shape.extent(n - 2) : b.shape.extent(0);
        if (ca != cb)
            fail(e, "dot contraction extent mismatch: " + std::to_string(ca) + " vs " +
                        std::to_string(cb) + " for shapes " + to_string(a.shape) + " and " +
                        to_string(b.shape));
        if (m == 1 && n == 1) {
            annotate(e, ValueType::Float);  // inner product: one number
            return;
        }
        std::vector<std::int64_t> dims;
        for (int k = 0; k + 1 < m; ++k) dims.push_back(a.shape.extent(k));
        for (int k = 0; k + 2 < n; ++k) dims.push_back(b.shape.extent(k));
        if (n >= 2) dims.push_back(b.shape.extent(n - 1));
        annotate(e, ValueType::Tensor, Shape{dims});
    }
};

}  // namespace

CheckResult check(Program& program) {
    return Checker{program}.run();
}

}  // namespace apollo::frontend
