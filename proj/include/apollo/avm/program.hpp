#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apollo/bstt.hpp"
#include "apollo/tensor.hpp"

namespace apollo::avm {

enum class Segment { Constant, Global, Pointer, This, Literal };

enum class Opcode { Push, Pop, Neg, Add, Sub, Mult, Div, Mvmul, Call };

/// Built-in subroutines reachable through `call <name> <nArgs>`. Each pops
/// its arguments (first pushed = first argument) and pushes exactly one
/// return word.
///
///   malloc size               -> ref to a zeroed RAM region
///   alloc_tensor rank d1..dr  -> ref to a zeroed tensor record
///   fiber t k                 -> ref to a copy of t's k-th last-mode fiber
///   writefiber dest off v acc -> copies (acc=0) or adds (acc=1) vector v
///                                into dest's payload at word offset off;
///                                returns dest
///   diag lambda d             -> ref to the d x d matrix lambda*I
///   crossmat u                -> ref to the 3x3 antisymmetric matrix of u
enum class Builtin { Malloc, AllocTensor, Fiber, WriteFiber, Diag, CrossMat };

const char* segment_name(Segment s);
const char* builtin_name(Builtin b);

struct Instr {
    Opcode op = Opcode::Neg;
    Segment seg = Segment::Constant;  // push/pop
    std::int64_t index = 0;           // segment index, or integer constant
    double fval = 0.0;                // float constant
    bool float_const = false;         // push constant: float vs integer
    Builtin callee = Builtin::Malloc;
    int nargs = 0;

    static Instr push_int(std::int64_t v);
    static Instr push_float(double v);
    static Instr push(Segment s, std::int64_t index);
    static Instr pop(Segment s, std::int64_t index);
    static Instr simple(Opcode op);
    static Instr call(Builtin b, int nargs);

    bool operator==(const Instr&) const = default;
};

/// One instruction in the Table-style text form, e.g. "push constant 3".
std::string to_string(const Instr& instr);

enum class GlobalType { Int, Float, Tensor };

struct GlobalInfo {
    std::string name;
    GlobalType type = GlobalType::Int;
};

/// One pooled tensor literal, stored flat in BSTT form.
struct Literal {
    bstt::FlatBstt flat;
    Shape shape;
};

/// A complete AVM program: straight-line code (no control flow; tensor
/// loops are unrolled at compile time), a tensor-literal pool, and the
/// declared globals in declaration order. global_count includes the
/// compiler's scratch slots beyond the declared variables.
struct Program {
    std::vector<Literal> literals;
    std::vector<Instr> code;
    std::vector<GlobalInfo> globals;
    std::int64_t global_count = 0;
};

}  // namespace apollo::avm
