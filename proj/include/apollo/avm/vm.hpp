#pragma once

#include <iosfwd>

#include "apollo/avm/accelerator.hpp"
#include "apollo/avm/program.hpp"

namespace apollo::avm {

/// Unrecoverable runtime fault; the VM halts on the first one.
struct Trap : std::runtime_error {
    std::int64_t pc;
    std::string instruction;

    Trap(std::int64_t pc, const std::string& instruction, const std::string& message);
};

/// Raised while materializing a program (e.g. a malformed literal).
struct LoadError : std::runtime_error {
    explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

/// A stack/RAM cell: integer, float, or a reference to a heap record.
struct Word {
    enum class Tag { Int, Float, Ref };
    Tag tag = Tag::Int;
    std::int64_t i = 0;  // Int value, or Ref address
    double f = 0.0;

    static Word from_int(std::int64_t v) { return {Tag::Int, v, 0.0}; }
    static Word from_float(double v) { return {Tag::Float, 0, v}; }
    static Word ref(std::int64_t addr) { return {Tag::Ref, addr, 0.0}; }

    bool operator==(const Word&) const = default;
};

struct Stats {
    std::int64_t mvmul_count = 0;
    std::int64_t host_ops = 0;
    std::int64_t heap_words = 0;
    std::int64_t max_stack_depth = 0;
};

struct VmOptions {
    std::int64_t max_dim = 0;   // reject mvmul operands beyond N x N; 0 = no cap
    bool poison_check = false;  // trap on reads of allocated-but-never-written words
    std::ostream* trace = nullptr;
    MvmBackend backend;         // defaults to accelerator_backend()
};

/// Stack machine over one flat RAM. Globals live at the bottom of RAM;
/// tensor records (rank word, extent words, row-major float payload) are
/// bump-allocated above them. The pointer segment's single slot anchors
/// the movable `this` segment, so re-anchoring it windows any record.
class Vm {
public:
    explicit Vm(const Program& program, VmOptions options = {});

    void step();
    void run();
    bool done() const { return pc_ >= static_cast<std::int64_t>(program_.code.size()); }

    const Stats& stats() const { return stats_; }
    std::int64_t pc() const { return pc_; }
    std::size_t stack_depth() const { return stack_.size(); }
    Word stack_top() const;

    Word global(std::int64_t index) const;
    /// Decodes the tensor record a ref points at (payload widened to double).
    DenseTensor read_tensor(const Word& ref) const;

private:
    struct Record {
        Shape shape;
        std::int64_t payload;  // RAM address of the first payload word
    };

    [[noreturn]] void fail(const std::string& message) const;

    const Word& load_word(std::int64_t addr) const;
    void store_word(std::int64_t addr, Word w);
    double number_at(std::int64_t addr) const;

    void push_word(Word w);
    Word pop_word();
    std::int64_t pop_ref();

    std::int64_t alloc_record(const Shape& shape);
    Record decode_record(std::int64_t addr) const;

    void execute(const Instr& instr);
    void execute_call(const Instr& instr);
    void execute_mvmul();
    void execute_arith(const Instr& instr);

    static double widen(const Word& w, const char* what, const Vm& vm);

    const Program& program_;
    VmOptions options_;
    std::vector<Word> ram_;
    std::vector<bool> written_;
    std::vector<Word> stack_;
    std::vector<std::int64_t> literal_addrs_;
    Word pointer0_ = Word::from_int(0);  // pointer segment, index 0
    std::int64_t pc_ = 0;
    Stats stats_;
};

}  // namespace apollo::avm
