#include "apollo/avm/text.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace apollo::avm {

const char* segment_name(Segment s) {
    switch (s) {
        case Segment::Constant: return "constant";
        case Segment::Global: return "global";
        case Segment::Pointer: return "pointer";
        case Segment::This: return "this";
        case Segment::Literal: return "literal";
    }
    return "?";
}

const char* builtin_name(Builtin b) {
    switch (b) {
        case Builtin::Malloc: return "malloc";
        case Builtin::AllocTensor: return "alloc_tensor";
        case Builtin::Fiber: return "fiber";
        case Builtin::WriteFiber: return "writefiber";
        case Builtin::Diag: return "diag";
        case Builtin::CrossMat: return "crossmat";
    }
    return "?";
}

Instr Instr::push_int(std::int64_t v) {
    Instr i;
    i.op = Opcode::Push;
    i.seg = Segment::Constant;
    i.index = v;
    return i;
}

Instr Instr::push_float(double v) {
    Instr i;
    i.op = Opcode::Push;
    i.seg = Segment::Constant;
    i.fval = v;
    i.float_const = true;
    return i;
}

Instr Instr::push(Segment s, std::int64_t index) {
    Instr i;
    i.op = Opcode::Push;
    i.seg = s;
    i.index = index;
    return i;
}

Instr Instr::pop(Segment s, std::int64_t index) {
    Instr i;
    i.op = Opcode::Pop;
    i.seg = s;
    i.index = index;
    return i;
}

Instr Instr::simple(Opcode op) {
    Instr i;
    i.op = op;
    return i;
}

Instr Instr::call(Builtin b, int nargs) {
    Instr i;
    i.op = Opcode::Call;
    i.callee = b;
    i.nargs = nargs;
    return i;
}

namespace {

// Exact round-trip spelling; a '.0' suffix keeps the value a float when
// the shortest form looks like an integer.
std::string float_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eE") == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

const char hex_digits[] = "0123456789abcdef";

std::string to_hex(std::span<const std::uint8_t> bytes) {
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s += hex_digits[b >> 4];
        s += hex_digits[b & 0xf];
    }
    return s;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::vector<std::uint8_t> from_hex(const std::string& s, int line_no) {
    if (s.size() % 2 != 0)
        throw FormatError("line " + std::to_string(line_no) + ": odd-length hex blob");
    std::vector<std::uint8_t> out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_value(s[i]), lo = hex_value(s[i + 1]);
        if (hi < 0 || lo < 0)
            throw FormatError("line " + std::to_string(line_no) + ": bad hex digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

const char* global_type_name(GlobalType t) {
    switch (t) {
        case GlobalType::Int: return "int";
        case GlobalType::Float: return "float";
        case GlobalType::Tensor: return "tensor";
    }
    return "?";
}

}  // namespace

std::string to_string(const Instr& instr) {
    switch (instr.op) {
        case Opcode::Push:
            if (instr.seg == Segment::Constant)
                return "push constant " +
                       (instr.float_const ? float_text(instr.fval) : std::to_string(instr.index));
            return std::string("push ") + segment_name(instr.seg) + " " +
                   std::to_string(instr.index);
        case Opcode::Pop:
            return std::string("pop ") + segment_name(instr.seg) + " " +
                   std::to_string(instr.index);
        case Opcode::Neg: return "neg";
        case Opcode::Add: return "add";
        case Opcode::Sub: return "sub";
        case Opcode::Mult: return "mult";
        case Opcode::Div: return "div";
        case Opcode::Mvmul: return "mvmul";
        case Opcode::Call:
            return std::string("call ") + builtin_name(instr.callee) + " " +
                   std::to_string(instr.nargs);
    }
    return "?";
}

void write_text(const Program& program, std::ostream& out) {
    out << ".literals\n";
    for (std::size_t k = 0; k < program.literals.size(); ++k) {
        const Literal& lit = program.literals[k];
        out << "t" << k << " rank " << lit.shape.rank() << " dims";
        for (int d = 0; d < lit.shape.rank(); ++d) out << " " << lit.shape.extent(d);
        out << " bstt " << to_hex(bstt::serialize_flat(lit.flat, lit.shape)) << "\n";
    }
    out << ".globals\n";
    for (std::size_t i = 0; i < program.globals.size(); ++i)
        out << "g" << i << " " << program.globals[i].name << " "
            << global_type_name(program.globals[i].type) << "\n";
    out << ".code\n";
    for (const Instr& instr : program.code) out << to_string(instr) << "\n";
}

namespace {

struct LineParser {
    std::istream& in;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw FormatError("line " + std::to_string(line_no) + ": " + message);
    }

    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> words;
        std::istringstream is(line);
        std::string w;
        while (is >> w) words.push_back(w);
        return words;
    }

    std::int64_t parse_int(const std::string& word) const {
        try {
            std::size_t used = 0;
            std::int64_t v = std::stoll(word, &used);
            if (used != word.size()) fail("bad integer '" + word + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad integer '" + word + "'");
        }
    }

    double parse_float(const std::string& word) const {
        try {
            std::size_t used = 0;
            double v = std::stod(word, &used);
            if (used != word.size()) fail("bad number '" + word + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad number '" + word + "'");
        }
    }
};

bool parse_segment(const std::string& word, Segment& seg) {
    if (word == "constant") seg = Segment::Constant;
    else if (word == "global") seg = Segment::Global;
    else if (word == "pointer") seg = Segment::Pointer;
    else if (word == "this") seg = Segment::This;
    else if (word == "literal") seg = Segment::Literal;
    else return false;
    return true;
}

bool parse_builtin(const std::string& word, Builtin& b) {
    if (word == "malloc") b = Builtin::Malloc;
    else if (word == "alloc_tensor") b = Builtin::AllocTensor;
    else if (word == "fiber") b = Builtin::Fiber;
    else if (word == "writefiber") b = Builtin::WriteFiber;
    else if (word == "diag") b = Builtin::Diag;
    else if (word == "crossmat") b = Builtin::CrossMat;
    else return false;
    return true;
}

bool parse_global_type(const std::string& word, GlobalType& t) {
    if (word == "int") t = GlobalType::Int;
    else if (word == "float") t = GlobalType::Float;
    else if (word == "tensor") t = GlobalType::Tensor;
    else return false;
    return true;
}

}  // namespace

Program parse_text(std::istream& in) {
    Program program;
    LineParser lp{in};
    enum class Section { None, Literals, Globals, Code } section = Section::None;
    std::string line;
    std::int64_t max_global = -1;

    while (std::getline(in, line)) {
        ++lp.line_no;
        std::vector<std::string> words = LineParser::split(line);
        if (words.empty() || words[0][0] == '#') continue;
        if (words[0] == ".literals") { section = Section::Literals; continue; }
        if (words[0] == ".globals") { section = Section::Globals; continue; }
        if (words[0] == ".code") { section = Section::Code; continue; }

        switch (section) {
            case Section::None:
                lp.fail("content before a section header");
            case Section::Literals: {
                if (words.size() < 5 || words[0] != "t" + std::to_string(program.literals.size()))
                    lp.fail("expected literal record t" + std::to_string(program.literals.size()));
                if (words[1] != "rank") lp.fail("expected 'rank'");
                std::int64_t rank = lp.parse_int(words[2]);
                if (rank < 0 || words.size() != 6 + static_cast<std::size_t>(rank))
                    lp.fail("malformed literal record");
                if (words[3] != "dims") lp.fail("expected 'dims'");
                std::vector<std::int64_t> dims;
                for (std::int64_t d = 0; d < rank; ++d)
                    dims.push_back(lp.parse_int(words[4 + static_cast<std::size_t>(d)]));
                std::size_t bstt_at = 4 + static_cast<std::size_t>(rank);
                if (words[bstt_at] != "bstt") lp.fail("expected 'bstt'");
                std::vector<std::uint8_t> bytes = from_hex(words[bstt_at + 1], lp.line_no);
                try {
                    auto [flat, shape] = bstt::deserialize_flat(bytes);
                    if (shape.dims() != dims)
                        lp.fail("literal dims disagree with encoded BSTT shape");
                    program.literals.push_back({std::move(flat), std::move(shape)});
                } catch (const bstt::BsttError& e) {
                    lp.fail(e.what());
                }
                break;
            }
            case Section::Globals: {
                if (words.size() != 3 ||
                    words[0] != "g" + std::to_string(program.globals.size()))
                    lp.fail("expected global record g" + std::to_string(program.globals.size()));
                GlobalType t;
                if (!parse_global_type(words[2], t)) lp.fail("bad global type '" + words[2] + "'");
                program.globals.push_back({words[1], t});
                break;
            }
            case Section::Code: {
                Instr instr;
                const std::string& mnemonic = words[0];
                if (mnemonic == "push" || mnemonic == "pop") {
                    if (words.size() != 3) lp.fail(mnemonic + " wants a segment and an index");
                    Segment seg;
                    if (!parse_segment(words[1], seg)) lp.fail("bad segment '" + words[1] + "'");
                    if (mnemonic == "pop") {
                        if (seg != Segment::Global && seg != Segment::Pointer && seg != Segment::This)
                            lp.fail("pop targets global, pointer or this");
                        instr = Instr::pop(seg, lp.parse_int(words[2]));
                    } else if (seg == Segment::Constant) {
                        if (words[2].find_first_of(".eE") != std::string::npos)
                            instr = Instr::push_float(lp.parse_float(words[2]));
                        else
                            instr = Instr::push_int(lp.parse_int(words[2]));
                    } else {
                        instr = Instr::push(seg, lp.parse_int(words[2]));
                    }
                } else if (mnemonic == "call") {
                    if (words.size() != 3) lp.fail("call wants a name and an argument count");
                    Builtin b;
                    if (!parse_builtin(words[1], b)) lp.fail("unknown subroutine '" + words[1] + "'");
                    instr = Instr::call(b, static_cast<int>(lp.parse_int(words[2])));
                } else if (words.size() == 1 && mnemonic == "neg") {
                    instr = Instr::simple(Opcode::Neg);
                } else if (words.size() == 1 && mnemonic == "add") {
                    instr = Instr::simple(Opcode::Add);
                } else if (words.size() == 1 && mnemonic == "sub") {
                    instr = Instr::simple(Opcode::Sub);
                } else if (words.size() == 1 && mnemonic == "mult") {
                    instr = Instr::simple(Opcode::Mult);
                } else if (words.size() == 1 && mnemonic == "div") {
                    instr = Instr::simple(Opcode::Div);
                } else if (words.size() == 1 && mnemonic == "mvmul") {
                    instr = Instr::simple(Opcode::Mvmul);
                } else {
                    lp.fail("unknown instruction '" + mnemonic + "'");
                }
                if (instr.op == Opcode::Push || instr.op == Opcode::Pop) {
                    if (instr.seg == Segment::Global) max_global = std::max(max_global, instr.index);
                    if (instr.seg == Segment::Literal &&
                        (instr.index < 0 ||
                         instr.index >= static_cast<std::int64_t>(program.literals.size())))
                        lp.fail("literal index out of range");
                }
                program.code.push_back(instr);
                break;
            }
        }
    }
    program.global_count =
        std::max(max_global + 1, static_cast<std::int64_t>(program.globals.size()));
    return program;
}

}  // namespace apollo::avm
