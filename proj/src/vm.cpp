#include "apollo/avm/vm.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "apollo/avm/text.hpp"

namespace apollo::avm {

Trap::Trap(std::int64_t pc_at, const std::string& instr, const std::string& message)
    : std::runtime_error("trap at pc " + std::to_string(pc_at) +
                         (instr.empty() ? "" : " (" + instr + ")") + ": " + message),
      pc(pc_at),
      instruction(instr) {}

Vm::Vm(const Program& program, VmOptions options)
    : program_(program), options_(std::move(options)) {
    if (!options_.backend) options_.backend = accelerator_backend();

    ram_.assign(static_cast<std::size_t>(program_.global_count), Word::from_int(0));
    written_.assign(ram_.size(), true);

    for (const Literal& lit : program_.literals) {
        DenseTensor dense;
        try {
            dense = bstt::to_dense(bstt::reconstruct(lit.flat, lit.shape));
        } catch (const bstt::BsttError& e) {
            throw LoadError(std::string("malformed literal: ") + e.what());
        }
        std::int64_t addr = alloc_record(dense.shape());
        std::int64_t payload = addr + 1 + dense.rank();
        for (std::int64_t k = 0; k < dense.size(); ++k)
            store_word(payload + k, Word::from_float(dense[k]));
        literal_addrs_.push_back(addr);
    }
    stats_ = {};  // literal materialization is not charged to the program
}

void Vm::fail(const std::string& message) const {
    std::string instr = done() ? "" : to_string(program_.code[static_cast<std::size_t>(pc_)]);
    throw Trap(pc_, instr, message);
}

const Word& Vm::load_word(std::int64_t addr) const {
    if (addr < 0 || addr >= static_cast<std::int64_t>(ram_.size()))
        fail("RAM read out of bounds at address " + std::to_string(addr));
    if (options_.poison_check && !written_[static_cast<std::size_t>(addr)])
        fail("read of never-written word at address " + std::to_string(addr));
    return ram_[static_cast<std::size_t>(addr)];
}

void Vm::store_word(std::int64_t addr, Word w) {
    if (addr < 0 || addr >= static_cast<std::int64_t>(ram_.size()))
        fail("RAM write out of bounds at address " + std::to_string(addr));
    ram_[static_cast<std::size_t>(addr)] = w;
    written_[static_cast<std::size_t>(addr)] = true;
}

double Vm::number_at(std::int64_t addr) const {
    const Word& w = load_word(addr);
    switch (w.tag) {
        case Word::Tag::Int: return static_cast<double>(w.i);
        case Word::Tag::Float: return w.f;
        case Word::Tag::Ref: break;
    }
    fail("tensor payload holds a ref at address " + std::to_string(addr));
}

void Vm::push_word(Word w) {
    stack_.push_back(w);
    stats_.max_stack_depth =
        std::max(stats_.max_stack_depth, static_cast<std::int64_t>(stack_.size()));
}

Word Vm::pop_word() {
    if (stack_.empty()) fail("stack underflow");
    Word w = stack_.back();
    stack_.pop_back();
    return w;
}

std::int64_t Vm::pop_ref() {
    Word w = pop_word();
    if (w.tag != Word::Tag::Ref) fail("expected a tensor ref on the stack");
    return w.i;
}

Word Vm::stack_top() const {
    if (stack_.empty()) throw std::out_of_range("stack is empty");
    return stack_.back();
}

Word Vm::global(std::int64_t index) const {
    if (index < 0 || index >= program_.global_count)
        throw std::out_of_range("global index out of range");
    return ram_[static_cast<std::size_t>(index)];
}

std::int64_t Vm::alloc_record(const Shape& shape) {
    std::int64_t addr = static_cast<std::int64_t>(ram_.size());
    std::int64_t count = 1 + shape.rank() + shape.element_count();
    ram_.resize(ram_.size() + static_cast<std::size_t>(count));
    written_.resize(ram_.size(), false);
    std::int64_t at = addr;
    ram_[static_cast<std::size_t>(at)] = Word::from_int(shape.rank());
    written_[static_cast<std::size_t>(at)] = true;
    for (int k = 0; k < shape.rank(); ++k) {
        ++at;
        ram_[static_cast<std::size_t>(at)] = Word::from_int(shape.extent(k));
        written_[static_cast<std::size_t>(at)] = true;
    }
    for (std::int64_t k = 0; k < shape.element_count(); ++k)
        ram_[static_cast<std::size_t>(addr + 1 + shape.rank() + k)] = Word::from_float(0.0);
    stats_.heap_words += count;
    return addr;
}

Vm::Record Vm::decode_record(std::int64_t addr) const {
    if (addr < 0 || addr >= static_cast<std::int64_t>(ram_.size()))
        fail("ref outside RAM: " + std::to_string(addr));
    const Word& rank_word = ram_[static_cast<std::size_t>(addr)];
    if (rank_word.tag != Word::Tag::Int || rank_word.i < 0 || rank_word.i > 64)
        fail("ref does not point at a tensor record");
    int rank = static_cast<int>(rank_word.i);
    if (addr + 1 + rank > static_cast<std::int64_t>(ram_.size())) fail("truncated tensor record");
    std::vector<std::int64_t> dims;
    for (int k = 0; k < rank; ++k) {
        const Word& d = ram_[static_cast<std::size_t>(addr + 1 + k)];
        if (d.tag != Word::Tag::Int || d.i < 1) fail("corrupt tensor record extents");
        dims.push_back(d.i);
    }
    Shape shape{dims};
    if (addr + 1 + rank + shape.element_count() > static_cast<std::int64_t>(ram_.size()))
        fail("truncated tensor record payload");
    return {std::move(shape), addr + 1 + rank};
}

DenseTensor Vm::read_tensor(const Word& ref) const {
    if (ref.tag != Word::Tag::Ref) throw std::invalid_argument("read_tensor wants a ref word");
    Record rec = decode_record(ref.i);
    DenseTensor out{rec.shape};
    for (std::int64_t k = 0; k < out.size(); ++k) out[k] = number_at(rec.payload + k);
    return out;
}

void Vm::step() {
    if (done()) fail("execution past the end of the program");
    const Instr& instr = program_.code[static_cast<std::size_t>(pc_)];
    execute(instr);
    if (instr.op == Opcode::Mvmul)
        ++stats_.mvmul_count;
    else
        ++stats_.host_ops;
    if (options_.trace)
        *options_.trace << std::setw(6) << pc_ << "  " << std::left << std::setw(32)
                        << to_string(instr) << std::right << " stack=" << stack_.size() << "\n";
    ++pc_;
}

void Vm::run() {
    while (!done()) step();
}

void Vm::execute(const Instr& instr) {
    switch (instr.op) {
        case Opcode::Push:
            switch (instr.seg) {
                case Segment::Constant:
                    push_word(instr.float_const ? Word::from_float(instr.fval)
                                                : Word::from_int(instr.index));
                    return;
                case Segment::Global:
                    if (instr.index < 0 || instr.index >= program_.global_count)
                        fail("global index out of range");
                    push_word(load_word(instr.index));
                    return;
                case Segment::Pointer:
                    if (instr.index != 0) fail("pointer segment has a single slot");
                    push_word(pointer0_);
                    return;
                case Segment::This: {
                    if (pointer0_.tag != Word::Tag::Ref)
                        fail("this segment is not anchored (pointer 0 holds no ref)");
                    push_word(load_word(pointer0_.i + instr.index));
                    return;
                }
                case Segment::Literal:
                    if (instr.index < 0 ||
                        instr.index >= static_cast<std::int64_t>(literal_addrs_.size()))
                        fail("literal index out of range");
                    push_word(Word::ref(literal_addrs_[static_cast<std::size_t>(instr.index)]));
                    return;
            }
            return;
        case Opcode::Pop: {
            Word w = pop_word();
            switch (instr.seg) {
                case Segment::Global:
                    if (instr.index < 0 || instr.index >= program_.global_count)
                        fail("global index out of range");
                    store_word(instr.index, w);
                    return;
                case Segment::Pointer:
                    if (instr.index != 0) fail("pointer segment has a single slot");
                    pointer0_ = w;
                    return;
                case Segment::This:
                    if (pointer0_.tag != Word::Tag::Ref)
                        fail("this segment is not anchored (pointer 0 holds no ref)");
                    store_word(pointer0_.i + instr.index, w);
                    return;
                default:
                    fail("pop targets global, pointer or this");
            }
            return;
        }
        case Opcode::Neg: {
            Word w = pop_word();
            if (w.tag == Word::Tag::Int)
                push_word(Word::from_int(-w.i));
            else if (w.tag == Word::Tag::Float)
                push_word(Word::from_float(-w.f));
            else
                fail("neg on a tensor ref");
            return;
        }
        case Opcode::Add:
        case Opcode::Sub:
        case Opcode::Mult:
        case Opcode::Div:
            execute_arith(instr);
            return;
        case Opcode::Mvmul:
            execute_mvmul();
            return;
        case Opcode::Call:
            execute_call(instr);
            return;
    }
}

double Vm::widen(const Word& w, const char* what, const Vm& vm) {
    switch (w.tag) {
        case Word::Tag::Int: return static_cast<double>(w.i);
        case Word::Tag::Float: return w.f;
        case Word::Tag::Ref: break;
    }
    vm.fail(std::string(what) + " on a tensor ref");
}

void Vm::execute_arith(const Instr& instr) {
    // Table order: pop b, then a; push a <op> b.
    Word b = pop_word();
    Word a = pop_word();
    const char* name = instr.op == Opcode::Add   ? "add"
                       : instr.op == Opcode::Sub ? "sub"
                       : instr.op == Opcode::Mult ? "mult"
                                                  : "div";
    if (a.tag == Word::Tag::Ref || b.tag == Word::Tag::Ref)
        fail(std::string(name) + " on a tensor ref");
    bool both_int = a.tag == Word::Tag::Int && b.tag == Word::Tag::Int;
    if (instr.op == Opcode::Div) {
        if ((b.tag == Word::Tag::Int && b.i == 0) || (b.tag == Word::Tag::Float && b.f == 0.0))
            fail("division by zero");
        if (both_int)
            push_word(Word::from_int(a.i / b.i));
        else
            push_word(Word::from_float(widen(a, name, *this) / widen(b, name, *this)));
        return;
    }
    if (both_int) {
        std::int64_t r = instr.op == Opcode::Add   ? a.i + b.i
                         : instr.op == Opcode::Sub ? a.i - b.i
                                                   : a.i * b.i;
        push_word(Word::from_int(r));
    } else {
        double x = widen(a, name, *this), y = widen(b, name, *this);
        double r = instr.op == Opcode::Add ? x + y : instr.op == Opcode::Sub ? x - y : x * y;
        push_word(Word::from_float(r));
    }
}

void Vm::execute_mvmul() {
    // Pops b, then A; pushes a ref to A*b.
    std::int64_t b_addr = pop_ref();
    std::int64_t a_addr = pop_ref();
    Record a = decode_record(a_addr);
    Record b = decode_record(b_addr);
    if (b.shape.rank() != 1) fail("mvmul vector operand has rank " + std::to_string(b.shape.rank()));
    std::int64_t rows, cols;
    if (a.shape.rank() == 1) {
        rows = 1;  // a bare vector acts as a one-row matrix
        cols = a.shape.extent(0);
    } else if (a.shape.rank() == 2) {
        rows = a.shape.extent(0);
        cols = a.shape.extent(1);
    } else {
        fail("mvmul matrix operand has rank " + std::to_string(a.shape.rank()));
    }
    std::int64_t blen = b.shape.extent(0);
    if (cols != blen)
        fail("mvmul dimension mismatch: matrix is " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", vector has length " + std::to_string(blen));
    if (options_.max_dim > 0 && (rows > options_.max_dim || cols > options_.max_dim))
        fail("mvmul operand exceeds the accelerator cap of " + std::to_string(options_.max_dim) +
             "x" + std::to_string(options_.max_dim));

    std::vector<double> amat(static_cast<std::size_t>(rows * cols));
    for (std::int64_t k = 0; k < rows * cols; ++k)
        amat[static_cast<std::size_t>(k)] = number_at(a.payload + k);
    std::vector<double> bvec(static_cast<std::size_t>(blen));
    for (std::int64_t k = 0; k < blen; ++k)
        bvec[static_cast<std::size_t>(k)] = number_at(b.payload + k);

    std::vector<double> result = options_.backend(amat, rows, cols, bvec);

    std::int64_t out = alloc_record(Shape{{rows}});
    for (std::int64_t k = 0; k < rows; ++k)
        store_word(out + 2 + k, Word::from_float(result[static_cast<std::size_t>(k)]));
    push_word(Word::ref(out));
}

void Vm::execute_call(const Instr& instr) {
    if (instr.nargs < 0) fail("negative argument count");
    if (static_cast<std::size_t>(instr.nargs) > stack_.size()) fail("stack underflow");
    std::vector<Word> args(static_cast<std::size_t>(instr.nargs));
    for (int k = instr.nargs - 1; k >= 0; --k) args[static_cast<std::size_t>(k)] = pop_word();

    auto want_arity = [&](int n) {
        if (instr.nargs != n)
            fail(std::string(builtin_name(instr.callee)) + " takes " + std::to_string(n) +
                 " arguments, got " + std::to_string(instr.nargs));
    };
    auto as_int = [&](const Word& w, const char* what) {
        if (w.tag != Word::Tag::Int) fail(std::string(what) + " must be an integer");
        return w.i;
    };
    auto as_ref = [&](const Word& w, const char* what) {
        if (w.tag != Word::Tag::Ref) fail(std::string(what) + " must be a tensor ref");
        return w.i;
    };
    auto as_number = [&](const Word& w, const char* what) {
        if (w.tag == Word::Tag::Ref) fail(std::string(what) + " must be a number");
        return w.tag == Word::Tag::Int ? static_cast<double>(w.i) : w.f;
    };

    switch (instr.callee) {
        case Builtin::Malloc: {
            want_arity(1);
            std::int64_t size = as_int(args[0], "malloc size");
            if (size < 1) fail("malloc size must be >= 1");
            std::int64_t addr = static_cast<std::int64_t>(ram_.size());
            ram_.resize(ram_.size() + static_cast<std::size_t>(size), Word::from_int(0));
            written_.resize(ram_.size(), true);  // malloc hands out zeroed memory
            stats_.heap_words += size;
            push_word(Word::ref(addr));
            return;
        }
        case Builtin::AllocTensor: {
            if (instr.nargs < 2) fail("alloc_tensor takes a rank and one extent per mode");
            std::int64_t rank = as_int(args[0], "alloc_tensor rank");
            if (rank != instr.nargs - 1)
                fail("alloc_tensor rank " + std::to_string(rank) + " does not match " +
                     std::to_string(instr.nargs - 1) + " extents");
            std::vector<std::int64_t> dims;
            for (int k = 1; k < instr.nargs; ++k) {
                std::int64_t d = as_int(args[static_cast<std::size_t>(k)], "alloc_tensor extent");
                if (d < 1) fail("alloc_tensor extent must be >= 1");
                dims.push_back(d);
            }
            push_word(Word::ref(alloc_record(Shape{dims})));
            return;
        }
        case Builtin::Fiber: {
            want_arity(2);
            Record t = decode_record(as_ref(args[0], "fiber tensor"));
            std::int64_t k = as_int(args[1], "fiber index");
            if (t.shape.rank() < 1) fail("fiber of a rank-0 record");
            std::int64_t len = t.shape.extent(t.shape.rank() - 1);
            std::int64_t count = t.shape.element_count() / len;
            if (k < 0 || k >= count) fail("fiber index " + std::to_string(k) + " out of range");
            std::int64_t out = alloc_record(Shape{{len}});
            for (std::int64_t j = 0; j < len; ++j)
                store_word(out + 2 + j, Word::from_float(number_at(t.payload + k * len + j)));
            push_word(Word::ref(out));
            return;
        }
        case Builtin::WriteFiber: {
            want_arity(4);
            std::int64_t dest_addr = as_ref(args[0], "writefiber destination");
            Record dest = decode_record(dest_addr);
            std::int64_t off = as_int(args[1], "writefiber offset");
            Record v = decode_record(as_ref(args[2], "writefiber source"));
            std::int64_t acc = as_int(args[3], "writefiber accumulate flag");
            if (acc != 0 && acc != 1) fail("writefiber accumulate flag must be 0 or 1");
            if (v.shape.rank() != 1) fail("writefiber source must be a vector record");
            std::int64_t len = v.shape.extent(0);
            if (off < 0 || off + len > dest.shape.element_count())
                fail("writefiber range [" + std::to_string(off) + ", " +
                     std::to_string(off + len) + ") outside the destination payload");
            for (std::int64_t j = 0; j < len; ++j) {
                double x = number_at(v.payload + j);
                if (acc == 1) x += number_at(dest.payload + off + j);
                store_word(dest.payload + off + j, Word::from_float(x));
            }
            push_word(Word::ref(dest_addr));
            return;
        }
        case Builtin::Diag: {
            want_arity(2);
            double lambda = as_number(args[0], "diag scale");
            std::int64_t d = as_int(args[1], "diag size");
            if (d < 1) fail("diag size must be >= 1");
            std::int64_t out = alloc_record(Shape{{d, d}});
            for (std::int64_t r = 0; r < d; ++r)
                for (std::int64_t c = 0; c < d; ++c)
                    store_word(out + 3 + r * d + c, Word::from_float(r == c ? lambda : 0.0));
            push_word(Word::ref(out));
            return;
        }
        case Builtin::CrossMat: {
            want_arity(1);
            Record u = decode_record(as_ref(args[0], "crossmat vector"));
            if (u.shape.rank() != 1 || u.shape.extent(0) != 3)
                fail("crossmat wants a length-3 vector");
            double u1 = number_at(u.payload), u2 = number_at(u.payload + 1),
                   u3 = number_at(u.payload + 2);
            const double m[9] = {0.0, -u3, u2, u3, 0.0, -u1, -u2, u1, 0.0};
            std::int64_t out = alloc_record(Shape{{3, 3}});
            for (int k = 0; k < 9; ++k) store_word(out + 3 + k, Word::from_float(m[k]));
            push_word(Word::ref(out));
            return;
        }
    }
}

}  // namespace apollo::avm
