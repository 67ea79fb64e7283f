#pragma once

#include "apollo/frontend/ast.hpp"

namespace apollo::frontend {

/// One declared variable. Global slots are assigned in declaration order.
struct Symbol {
    std::string name;
    ValueType type = ValueType::Int;
    Shape shape;  // tensors only
    std::int64_t global_index = 0;
    int line = 0;
};

struct CheckResult {
    std::vector<Symbol> symbols;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

/// Resolves operator overloads and infers a static type and shape for every
/// expression, in place. Since the grammar has no reassignment or control
/// flow, every tensor shape is known at compile time; the code generator
/// relies on that to unroll fiber loops fully.
///
/// Overload rules for '*': scalar*scalar, scalar*tensor (either order), or
/// the tensor dot product. A rank-1 . rank-1 dot is typed float, since it
/// is an inner product and yields one number. '/' is scalar-only;
/// '@' '&' '%' '#' are tensor-only. '+'/'-' work on two scalars or two
/// equal-shape tensors.
CheckResult check(Program& program);

}  // namespace apollo::frontend
